#include "warpres/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace warpres {

namespace fs = std::filesystem;

std::string fmt_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_int(std::uint64_t v) { return std::to_string(v); }

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) throw std::invalid_argument("csv: row width differs from header");
    for (const auto& c : row)
        if (c.find_first_of(",\n\"") != std::string::npos) throw std::invalid_argument("csv: cell contains a separator");
    rows.push_back(std::move(row));
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::out_of_range("csv: no column " + name);
    return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(std::strtod(r[c].c_str(), nullptr));
    return out;
}

std::string CsvTable::to_string() const {
    std::string s;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            s += cells[i];
        }
        s += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return s;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size()) throw std::runtime_error("csv: ragged row");
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text(path)); }

void write_csv(const std::string& path, const CsvTable& t) { write_text(path, t.to_string()); }

void write_json(const std::string& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

ordered_json read_json(const std::string& path) { return ordered_json::parse(read_text(path)); }

ordered_json json_num(double v) {
    if (std::isfinite(v)) return v;
    return fmt_num(v);
}

double json_to_double(const ordered_json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return std::strtod(j.get<std::string>().c_str(), nullptr);
    throw std::invalid_argument("json value is not a number");
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

}  // namespace

std::string svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 55;
    auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double a = tx(s.x[i]), b = ty(s.y[i]);
            if (!std::isfinite(a) || !std::isfinite(b)) continue;
            x0 = std::min(x0, a);
            x1 = std::max(x1, a);
            y0 = std::min(y0, b);
            y1 = std::max(y1, b);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double a) { return L + (a - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double b) { return H - B - (b - y0) / (y1 - y0) * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream o;
    char buf[128];
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(spec.title)
      << "</text>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double a = x0 + (x1 - x0) * k / 4.0, b = y0 + (y1 - y0) * k / 4.0;
        std::snprintf(buf, sizeof buf, "%.3g", spec.log_x ? std::pow(10.0, a) : a);
        o << "<text x=\"" << px(a) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">" << buf
          << "</text>\n";
        std::snprintf(buf, sizeof buf, "%.3g", spec.log_y ? std::pow(10.0, b) : b);
        o << "<text x=\"" << L - 6 << "\" y=\"" << py(b) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << buf
          << "</text>\n";
    }
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << xml_escape(spec.xlabel) << "</text>\n";
    o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << xml_escape(spec.ylabel) << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* col = colors[k % 6];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double a = tx(s.x[i]), b = ty(s.y[i]);
            if (!std::isfinite(a) || !std::isfinite(b)) continue;
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(a), py(b));
            pts += buf;
            o << "<circle cx=\"" << px(a) << "\" cy=\"" << py(b) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
        }
        o << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"" << pts << "\"/>\n";
        o << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 16 * (k + 1) << "\" font-size=\"12\" fill=\"" << col
          << "\">" << xml_escape(s.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string file_digest(const std::string& path) {
    const std::string data = read_text(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunDirectory::RunDirectory(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

std::string RunDirectory::path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

void RunDirectory::record(const std::string& name, const std::string& kind) {
    for (auto& f : files_)
        if (f.first == name) return;
    files_.emplace_back(name, kind);
}

void RunDirectory::csv(const std::string& name, const CsvTable& t) {
    write_csv(path(name), t);
    record(name, "csv");
}

void RunDirectory::json(const std::string& name, const ordered_json& j) {
    write_json(path(name), j);
    record(name, "json");
}

void RunDirectory::svg(const std::string& name, const std::string& text) {
    write_text(path(name), text);
    record(name, "svg");
}

void RunDirectory::sidecar_csv(const std::string& name, const CsvTable& t) {
    write_csv(path(name), t);
    if (std::find(sidecars_.begin(), sidecars_.end(), name) == sidecars_.end()) sidecars_.push_back(name);
}

void RunDirectory::finish(const std::string& command, const ordered_json& config, const ordered_json& summary,
                          unsigned workers) {
    ordered_json m;
    m["command"] = command;
    m["config"] = config;
    m["summary"] = summary;
    ordered_json files = ordered_json::array();
    for (const auto& [name, kind] : files_) {
        ordered_json f;
        f["name"] = name;
        f["kind"] = kind;
        f["fnv1a64"] = file_digest(path(name));
        files.push_back(f);
    }
    m["files"] = files;
    m["sidecars"] = sidecars_;
    m["sidecars"].push_back("run_info.json");
    write_json(path("manifest.json"), m);

    ordered_json info;
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    info["finished_utc"] = buf;
    info["workers"] = workers;
    info["hardware_concurrency"] = std::thread::hardware_concurrency();
    write_json(path("run_info.json"), info);
}

}  // namespace warpres
