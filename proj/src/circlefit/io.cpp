#include "circlefit/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace circlefit {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string strip(const std::string& line) {
    std::string s = line.substr(0, line.find('#'));
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

DataSet parse_dataset(const std::string& text) {
    std::vector<Point> pts;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = strip(line);
        if (s.empty()) continue;
        std::istringstream ls(s);
        double x, y;
        std::string extra;
        if (!(ls >> x >> y) || (ls >> extra))
            fail(ErrorCode::Io, "malformed dataset line " + std::to_string(lineno) + ": " + s);
        if (!std::isfinite(x) || !std::isfinite(y))
            fail(ErrorCode::Io, "non-finite value on dataset line " + std::to_string(lineno));
        pts.push_back({x, y});
    }
    if (pts.empty()) fail(ErrorCode::Io, "dataset is empty");
    return DataSet(std::move(pts));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path + ": " + std::strerror(errno));
    std::ostringstream out;
    out << in.rdbuf();
    if (in.bad()) fail(ErrorCode::Io, "read error on " + path);
    return out.str();
}

DataSet load_dataset(const std::string& path) {
    return parse_dataset(read_file(path));
}

std::string format_dataset(const DataSet& data) {
    std::string out = "# x y\n";
    for (const Point& p : data.points()) {
        out += fmt_g17(p.x);
        out += ' ';
        out += fmt_g17(p.y);
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::Io, "cannot create " + tmp + ": " + std::strerror(errno));
        out << content;
        out.flush();
        if (!out) fail(ErrorCode::Io, "write error on " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        fail(ErrorCode::Io, "cannot rename " + tmp + " to " + path + ": " + std::strerror(errno));
    }
}

void save_dataset(const DataSet& data, const std::string& path) {
    write_file_atomic(path, format_dataset(data));
}

std::map<std::string, std::string> parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = strip(line);
        if (s.empty()) continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::Io, "malformed config line " + std::to_string(lineno) + ": " + s);
        std::string key = strip(s.substr(0, eq));
        std::string value = strip(s.substr(eq + 1));
        if (key.empty() || value.empty())
            fail(ErrorCode::Io, "malformed config line " + std::to_string(lineno) + ": " + s);
        kv[key] = value;
    }
    return kv;
}

}  // namespace circlefit
