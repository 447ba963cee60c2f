#include "wavekit/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "wavekit/numerics.hpp"

namespace wavekit {

bool ResidualReport::passed() const {
    for (const auto& e : entries)
        if (!e.pass) return false;
    return true;
}

ReportEntry& ResidualReport::add_max(const std::string& label, double value, double threshold) {
    entries.push_back({label, value, threshold, std::isfinite(value) && value <= threshold, {}, {}});
    return entries.back();
}

ReportEntry& ResidualReport::add_min(const std::string& label, double value, double threshold) {
    entries.push_back({label, value, threshold, std::isfinite(value) && value > threshold, {}, {}});
    return entries.back();
}

const ReportEntry& ResidualReport::at(const std::string& label) const {
    for (const auto& e : entries)
        if (e.label == label) return e;
    throw std::out_of_range("report has no entry '" + label + "'");
}

bool ResidualReport::has(const std::string& label) const {
    for (const auto& e : entries)
        if (e.label == label) return true;
    return false;
}

void ResidualReport::append(const ResidualReport& other, const std::string& prefix) {
    for (auto e : other.entries) {
        e.label = prefix + e.label;
        entries.push_back(std::move(e));
    }
}

void fit_rate(RateStudy& study, std::size_t drop_largest, std::size_t drop_smallest) {
    const std::size_t n = study.samples.size();
    if (drop_largest + drop_smallest + 2 > n) throw InvalidInput("rate fit window leaves fewer than 2 samples");
    std::vector<double> lx, ly;
    for (std::size_t k = drop_largest; k < n - drop_smallest; ++k) {
        lx.push_back(std::log(study.samples[k].eps));
        ly.push_back(std::log(std::max(study.samples[k].norm, 1e-300)));
    }
    const auto fit = numerics::fit_line(lx, ly);
    study.fitted_slope = fit.slope;
    study.r2 = fit.r2;
    study.fit_begin = drop_largest;
    study.fit_end = n - drop_smallest;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

nlohmann::json to_json(const ResidualReport& report) {
    nlohmann::json j;
    j["title"] = report.title;
    j["passed"] = report.passed();
    auto& arr = j["entries"] = nlohmann::json::array();
    for (const auto& e : report.entries) {
        nlohmann::json je{{"label", e.label}, {"value", number(e.value)}, {"threshold", number(e.threshold)}, {"pass", e.pass}};
        if (!e.per_test.empty()) {
            auto& pt = je["per_test"] = nlohmann::json::array();
            for (double v : e.per_test) pt.push_back(number(v));
        }
        if (!e.note.empty()) je["note"] = e.note;
        arr.push_back(std::move(je));
    }
    return j;
}

nlohmann::json to_json(const RateStudy& study) {
    nlohmann::json j{{"label", study.label},
                     {"predicted_slope", number(study.predicted_slope)},
                     {"fitted_slope", number(study.fitted_slope)},
                     {"r2", number(study.r2)},
                     {"fit_window", {study.fit_begin, study.fit_end}}};
    auto& arr = j["samples"] = nlohmann::json::array();
    for (const auto& s : study.samples) arr.push_back({{"eps", number(s.eps)}, {"norm", number(s.norm)}});
    if (!study.note.empty()) j["note"] = study.note;
    return j;
}

std::string to_csv(const ResidualReport& report) {
    std::ostringstream os;
    os << "label,value,threshold,pass\n";
    for (const auto& e : report.entries)
        os << csv_field(e.label) << ',' << format_double(e.value) << ',' << format_double(e.threshold) << ','
           << (e.pass ? "true" : "false") << '\n';
    return os.str();
}

std::string to_csv(const std::vector<RateStudy>& studies) {
    std::ostringstream os;
    os << "label,eps,norm,predicted_slope,fitted_slope,r2\n";
    for (const auto& st : studies)
        for (const auto& s : st.samples)
            os << csv_field(st.label) << ',' << format_double(s.eps) << ',' << format_double(s.norm) << ','
               << format_double(st.predicted_slope) << ',' << format_double(st.fitted_slope) << ','
               << format_double(st.r2) << '\n';
    return os.str();
}

}  // namespace wavekit
