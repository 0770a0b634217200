#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace warpres {

using ordered_json = nlohmann::ordered_json;

// Every number is written with %.17g so a read-back is exact.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::size_t column(const std::string& name) const;
    std::vector<double> numbers(const std::string& name) const;
    std::string to_string() const;
};

std::string fmt_num(double v);
std::string fmt_int(std::uint64_t v);

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
void write_csv(const std::string& path, const CsvTable& t);
void write_json(const std::string& path, const ordered_json& j);
ordered_json read_json(const std::string& path);

// JSON number that survives non-finite values (written as strings).
ordered_json json_num(double v);
double json_to_double(const ordered_json& j);

struct PlotSeries {
    std::string name;
    std::vector<double> x, y;
};

struct PlotSpec {
    std::string title, xlabel, ylabel;
    bool log_x = false, log_y = false;
};

std::string svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

// Records produced files; writes manifest.json (deterministic) and run_info.json
// (timestamps, host concurrency, worker count).
class RunDirectory {
public:
    explicit RunDirectory(std::string dir);

    const std::string& dir() const { return dir_; }
    std::string path(const std::string& name) const;

    void csv(const std::string& name, const CsvTable& t);
    void json(const std::string& name, const ordered_json& j);
    void svg(const std::string& name, const std::string& text);
    // Files excluded from the manifest digest list (timing data).
    void sidecar_csv(const std::string& name, const CsvTable& t);

    void finish(const std::string& command, const ordered_json& config, const ordered_json& summary,
                unsigned workers);

private:
    void record(const std::string& name, const std::string& kind);

    std::string dir_;
    std::vector<std::pair<std::string, std::string>> files_;
    std::vector<std::string> sidecars_;
};

}  // namespace warpres
