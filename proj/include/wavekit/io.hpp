#pragma once

// Solution files: "WVKT0001", a little-endian u64 header length, a JSON
// header, then little-endian float64 arrays in header order. Files ending in
// .json hold the same header with the arrays inline.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>

#include <json.hpp>

#include "wavekit/formulations.hpp"

namespace wavekit {

/// I/O or parse failure; byte_offset locates the problem when known (else -1).
class IoError : public std::runtime_error {
public:
    IoError(const std::string& what, std::int64_t offset = -1);
    std::int64_t byte_offset() const { return offset_; }

private:
    std::int64_t offset_;
};

/// Periodic sample of a synthetic field (1D: ny = 1).
struct FieldData {
    NodalField values;
    double period = 0.0;
    int dimension = 1;
};

using AnySolution = std::variant<VelocitySolution, StreamSolution, HeightSolution, FieldData>;

struct SolutionFile {
    AnySolution solution;
    nlohmann::json metadata = nlohmann::json::object();
};

/// "velocity", "stream", "height" or "field".
std::string formulation_name(const AnySolution& s);

void write_solution(const std::filesystem::path& path, const SolutionFile& file);
SolutionFile read_solution(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory, then renames.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace wavekit
