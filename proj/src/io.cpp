#include "bevkit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace bevkit {

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) return "nan";
    return {buf, end};
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(std::move(line));
    }
    return lines;
}

void write_pgm(const std::filesystem::path& path, const BinaryGrid& grid) {
    std::string out = "P5\n" + std::to_string(grid.width()) + " " +
                      std::to_string(grid.height()) + "\n255\n";
    out.reserve(out.size() + grid.size());
    for (auto b : grid.data()) out.push_back(static_cast<char>(b ? 255 : 0));
    write_text_file(path, out);
}

BinaryGrid read_pgm(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string magic;
    int width = 0;
    int height = 0;
    int maxval = 0;
    in >> magic >> width >> height >> maxval;
    if (magic != "P5" || width <= 0 || height <= 0 || maxval != 255) {
        throw Error(ErrorCode::Io, "unsupported PGM " + path.string());
    }
    in.get();
    const auto offset = static_cast<std::size_t>(in.tellg());
    BinaryGrid grid(width, height);
    if (text.size() < offset + grid.size()) {
        throw Error(ErrorCode::Io, "truncated PGM " + path.string());
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.data()[i] = static_cast<unsigned char>(text[offset + i]) >= 128 ? 1 : 0;
    }
    return grid;
}

void write_pgm_normalized(const std::filesystem::path& path, const Grid<double>& grid) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double z : grid.data()) {
        if (std::isfinite(z)) {
            lo = std::min(lo, z);
            hi = std::max(hi, z);
        }
    }
    std::string out = "P5\n" + std::to_string(grid.width()) + " " +
                      std::to_string(grid.height()) + "\n255\n";
    const double span = hi > lo ? hi - lo : 1.0;
    for (double z : grid.data()) {
        int level = 0;
        if (std::isfinite(z)) level = 1 + static_cast<int>(std::lround(254.0 * (z - lo) / span));
        out.push_back(static_cast<char>(std::clamp(level, 0, 255)));
    }
    write_text_file(path, out);
}

}  // namespace bevkit
