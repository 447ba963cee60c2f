#pragma once

// Check results and rate studies, with JSON and CSV renderings whose
// number formatting is shortest round-trip and therefore reproducible.

#include <string>
#include <vector>

#include <json.hpp>

namespace wavekit {

struct ReportEntry {
    std::string label;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = true;
    std::vector<double> per_test;
    std::string note;
};

struct ResidualReport {
    std::string title;
    std::vector<ReportEntry> entries;

    bool passed() const;
    /// Appends an entry that passes when value <= threshold.
    ReportEntry& add_max(const std::string& label, double value, double threshold);
    /// Appends an entry that passes when value > threshold (sign margins).
    ReportEntry& add_min(const std::string& label, double value, double threshold);
    const ReportEntry& at(const std::string& label) const;
    bool has(const std::string& label) const;
    void append(const ResidualReport& other, const std::string& prefix = "");
};

struct RateSample {
    double eps = 0.0;
    double norm = 0.0;
};

struct RateStudy {
    std::string label;
    std::vector<RateSample> samples;
    double predicted_slope = 0.0;
    double fitted_slope = 0.0;
    double r2 = 0.0;
    std::size_t fit_begin = 0;
    std::size_t fit_end = 0;
    std::string note;
};

/// Fits log(norm) against log(eps) over samples [drop_largest, size - drop_smallest).
void fit_rate(RateStudy& study, std::size_t drop_largest, std::size_t drop_smallest = 0);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

nlohmann::json to_json(const ResidualReport& report);
nlohmann::json to_json(const RateStudy& study);
std::string to_csv(const ResidualReport& report);
/// Columns: label, eps, norm, predicted_slope, fitted_slope, r2.
std::string to_csv(const std::vector<RateStudy>& studies);

}  // namespace wavekit
