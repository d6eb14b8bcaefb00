#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rsmfg/dynkin.hpp"
#include "rsmfg/equilibrium.hpp"
#include "rsmfg/model.hpp"

namespace rsmfg {

/// Sectioned key/value configuration: [section] headers, key = value lines,
/// '#' or ';' comments. Values may be scalars or comma-separated lists;
/// matrix rows are separated by ';'.
class IniConfig {
public:
    static IniConfig parse_file(const std::string& path);
    static IniConfig parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long get_long(const std::string& section, const std::string& key, long fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;
    std::vector<double> get_list(const std::string& section, const std::string& key,
                                 const std::vector<double>& fallback) const;
    Matrix get_matrix(const std::string& section, const std::string& key) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    /// Canonical dump (sorted sections and keys) used for hashing.
    std::string canonical() const;

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

/// FNV-1a over the canonical config text; embedded in every output so that
/// files from mismatched configs are detectable.
uint64_t config_hash(const IniConfig& cfg);
std::string config_hash_hex(const IniConfig& cfg);

/// Model instance assembled from [model], [profit], [chain] sections.
/// Registered families: "benchmark" and "custom-polynomial".
struct ModelBundle {
    RegimeModel model;
    ProfitSpec spec;
    std::string kind;
};

ModelBundle build_model(const IniConfig& cfg);

/// CSV writing with fixed formatting ('%.17g', LF endings) so reruns are
/// byte-identical. The hash comment line carries the config fingerprint.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& hash_hex,
              const std::vector<std::string>& columns);
    ~CsvWriter();
    void row(const std::vector<double>& values);
    void raw_row(const std::string& line);

private:
    void* file_;
};

std::string format_double(double v);

/// JSON summaries for the solver outputs.
std::string dynkin_summary_json(const DynkinSolution& sol, const std::string& hash_hex);
std::string stationary_summary_json(const StationaryCDF& law, double moment, double clamped,
                                    const std::string& hash_hex);
std::string equilibrium_summary_json(const EquilibriumResult& res, const std::string& hash_hex);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace rsmfg
