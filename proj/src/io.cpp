#include "ringqc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ringqc/errors.hpp"

namespace ringqc::io {

std::string format_double(double value) {
    // %.17g always round-trips; prefer the shortest repr that does.
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == value)
            return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void atomic_write(const std::filesystem::path& path,
                  const std::string& content) {
    const auto dir = path.parent_path();
    if (!dir.empty())
        std::filesystem::create_directories(dir);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw Error("cannot open '" + tmp + "' for writing");
        f.write(content.data(),
                static_cast<std::streamsize>(content.size()));
        if (!f)
            throw Error("write failed for '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace ringqc::io
