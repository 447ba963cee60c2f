#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "fixtures.hpp"
#include "wavekit/io.hpp"
#include "wavekit/report.hpp"

using namespace wavekit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "wavekit_unit_io";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("io") {
    TEST_CASE("binary and JSON files round-trip every formulation bit for bit") {
        const auto t = fixtures::s1(16, 9);
        for (const char* ext : {".wvk", ".json"}) {
            const auto pv = scratch(std::string("v") + ext);
            write_solution(pv, {t.velocity, {{"generator", "laminar"}}});
            const auto fv = read_solution(pv);
            REQUIRE(formulation_name(fv.solution) == "velocity");
            const auto& v = std::get<VelocitySolution>(fv.solution);
            CHECK(v.u.values() == t.velocity.u.values());
            CHECK(v.P.values() == t.velocity.P.values());
            CHECK(v.grid.surface.eta == t.velocity.grid.surface.eta);
            CHECK(v.params.B == t.velocity.params.B);
            CHECK(fv.metadata.at("generator") == "laminar");

            const auto ps = scratch(std::string("s") + ext);
            write_solution(ps, {t.stream, {}});
            const auto fstream_file = read_solution(ps);
            const auto& s = std::get<StreamSolution>(fstream_file.solution);
            CHECK(s.psi.values() == t.stream.psi.values());
            CHECK(s.gamma.Gamma == t.stream.gamma.Gamma);

            const auto ph = scratch(std::string("h") + ext);
            write_solution(ph, {t.height, {}});
            const auto fh = read_solution(ph);
            const auto& h = std::get<HeightSolution>(fh.solution);
            CHECK(h.h.values() == t.height.h.values());
            CHECK(h.grid.p0 == t.height.grid.p0);
        }
    }

    TEST_CASE("truncated and foreign files report a byte offset") {
        const auto t = fixtures::s1(16, 9);
        const auto p = scratch("trunc.wvk");
        write_solution(p, {t.stream, {}});
        const std::string bytes = slurp(p);
        {
            std::ofstream out(p, std::ios::binary | std::ios::trunc);
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 100));
        }
        try {
            read_solution(p);
            FAIL("truncated file was accepted");
        } catch (const IoError& e) {
            CHECK(e.byte_offset() > 0);
            CHECK(e.byte_offset() < static_cast<std::int64_t>(bytes.size()));
        }
        {
            std::ofstream out(p, std::ios::binary | std::ios::trunc);
            out << "not a solution file at all";
        }
        try {
            read_solution(p);
            FAIL("foreign file was accepted");
        } catch (const IoError& e) {
            CHECK(e.byte_offset() == 0);
        }
        CHECK_THROWS_AS(read_solution(scratch("missing.wvk")), IoError);
    }

    TEST_CASE("atomic text writes leave no temporaries") {
        const auto p = scratch("report.txt");
        write_text_atomic(p, "abc\n");
        write_text_atomic(p, "def\n");
        CHECK(slurp(p) == "def\n");
        for (const auto& e : fs::directory_iterator(p.parent_path()))
            CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
    }

    TEST_CASE("shortest round-trip number text") {
        CHECK(format_double(0.1) == "0.1");
        CHECK(format_double(1.0) == "1");
        CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
        CHECK(std::stod(format_double(6.02214076e23)) == 6.02214076e23);
    }

    TEST_CASE("report entries") {
        ResidualReport r;
        r.add_max("small", 1e-9, 1e-6);
        r.add_min("margin", -0.1, 0.0);
        CHECK(r.at("small").pass);
        CHECK_FALSE(r.at("margin").pass);
        CHECK_FALSE(r.passed());
        CHECK(r.has("small"));
        CHECK_FALSE(r.has("absent"));
        ResidualReport other;
        other.add_max("x", std::nan(""), 1.0);
        CHECK_FALSE(other.at("x").pass);
        r.append(other, "pre ");
        CHECK(r.has("pre x"));
        const auto csv = to_csv(r);
        CHECK(csv.find("small") != std::string::npos);
        CHECK(to_json(r)["entries"].size() == 3);
    }

    TEST_CASE("rate fits") {
        RateStudy s;
        s.label = "power";
        s.predicted_slope = 1.5;
        for (int k = 0; k < 7; ++k) {
            const double eps = std::ldexp(1.0, -k);
            s.samples.push_back({eps, 3.0 * std::pow(eps, 1.5)});
        }
        s.samples[0].norm = 100.0;
        fit_rate(s, 1);
        CHECK(s.fitted_slope == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(s.r2 == doctest::Approx(1.0).epsilon(1e-12));
        const auto csv = to_csv(std::vector<RateStudy>{s});
        CHECK(csv.rfind("label,eps,norm,predicted_slope,fitted_slope,r2", 0) == 0);
    }
}
