// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "wavekit/cli.hpp"
#include "wavekit/io.hpp"
#include "wavekit/synth.hpp"
#include "wavekit/transforms.hpp"
#include "wavekit/weakcheck.hpp"

using namespace wavekit;
namespace fs = std::filesystem;

namespace {

namespace tol {
constexpr double kExactS0 = 1e-10;
constexpr double kExactS1 = 1e-6;
constexpr double kExactSeconds = 30.0;
constexpr double kRoundTrip = 1e-5;
constexpr double kRoundTripRatio = 3.5;
constexpr double kGapS1 = 1e-6;
constexpr double kGapPerturbed = 1e-4;
constexpr double kJacobian = 1e-6;
constexpr double kSlopeF = 0.1;
constexpr double kSlopeGrad = 0.1;
constexpr double kSlopeR = 0.15;
constexpr double kR2 = 0.98;
constexpr double kLemma1Seconds = 120.0;
constexpr double kProduct = 1e-8;
constexpr double kLemma2 = 1e-8;
constexpr double kFluxIdentity = 1e-7;
constexpr double kDecayingSlope = 0.35;
constexpr double kFlatSlope = 0.05;
}  // namespace tol

constexpr std::uint64_t kSeed = 7;

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

LaminarTriple s_flow(double gamma0, std::size_t nx, std::size_t ny) {
    LaminarSpec spec;
    spec.gamma0 = gamma0;
    spec.nx = nx;
    spec.ny = ny;
    return laminar(spec);
}

double worst(const ResidualReport& r) {
    double m = 0.0;
    for (const auto& e : r.entries) m = std::max(m, e.value);
    return m;
}

void exact_suite(Verdict& v) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int which : {0, 1}) {
        const double thr = which == 0 ? tol::kExactS0 : tol::kExactS1;
        const std::string name = which == 0 ? "S0" : "S1";
        const auto t = s_flow(which, 256, 129);
        for (const auto& r : {check_invariants(t.velocity), check_invariants(t.stream), check_invariants(t.height),
                              check_invariants(t.stream.gamma)})
            v.require(r.passed(), name + " " + r.title + " invariants");
        const auto fluid = fluid_battery(t.stream.grid, kSeed);
        const auto strip = strip_battery(t.height.grid, kSeed);
        v.require(fluid.size() == 12 && strip.size() == 12, "12 test functions per battery");
        const auto wv = weak_residual_velocity(t.velocity, fluid, thr);
        const auto ws = weak_residual_stream(t.stream, fluid, thr);
        const auto wh = weak_residual_height(t.height, strip, thr);
        const auto cs = classical_residuals(t.stream, thr);
        const auto ch = classical_residuals(t.height, thr);
        const auto cv = classical_residuals(t.velocity, thr);
        for (const auto* r : {&wv, &ws, &wh, &cs, &ch, &cv}) v.require(r->passed(), name + " " + r->title);
        v.detail << name << " weak max " << format_double(std::max({worst(wv), worst(ws), worst(wh)})) << ", classical max "
                 << format_double(std::max({worst(cs), worst(ch), worst(cv)})) << "; ";
    }
    const double elapsed = seconds_since(t0);
    v.detail << "runtime " << format_double(std::round(elapsed * 100.0) / 100.0) << " s";
    v.require(elapsed <= tol::kExactSeconds, "runtime");
}

double round_trip_error(std::size_t nx, std::ostringstream& detail) {
    const auto t = s_flow(1.0, nx, nx / 2 + 1);
    const auto s1 = velocity_to_stream(t.velocity).stream;
    const auto h = stream_to_height(s1);
    const auto s2 = height_to_stream(h);
    const auto v2 = stream_to_velocity(s2).velocity;
    const auto h2 = stream_to_height(s2);
    const double eu = max_abs_diff(v2.u, t.velocity.u);
    const double ev = max_abs_diff(v2.v, t.velocity.v);
    const double eP = max_abs_diff(v2.P, t.velocity.P);
    const double epsi = max_abs_diff(s2.psi, t.stream.psi);
    const double eh = std::max(max_abs_diff(h.h, t.height.h), max_abs_diff(h2.h, t.height.h));
    detail << "N=" << nx << " u " << format_double(eu) << " v " << format_double(ev) << " P " << format_double(eP)
           << " psi " << format_double(epsi) << " h " << format_double(eh) << "; ";
    return std::max({eu, ev, eP, epsi, eh});
}

void round_trip_suite(Verdict& v) {
    const double e256 = round_trip_error(256, v.detail);
    const double e512 = round_trip_error(512, v.detail);
    v.detail << "refinement ratio " << format_double(e256 / e512);
    v.require(e256 <= tol::kRoundTrip, "sup error at N=256");
    v.require(e256 / e512 >= tol::kRoundTripRatio, "refinement ratio");
}

void equivalence_suite(Verdict& v) {
    const auto t = s_flow(1.0, 256, 129);
    const auto a = equivalence_audit(t.stream, fluid_battery(t.stream.grid, kSeed), tol::kGapS1);
    const auto rough = cli::perturbed_laminar(cli::PerturbSetup{});
    const auto b = equivalence_audit(rough, fluid_battery(rough.grid, kSeed), tol::kGapPerturbed);
    const double g1 = a.at("paired residual gap").value, j1 = a.at("jacobian identity").value;
    const double g2 = b.at("paired residual gap").value, j2 = b.at("jacobian identity").value;
    v.detail << "S1 gap " << format_double(g1) << " jacobian " << format_double(j1) << "; perturbed S1 gap "
             << format_double(g2) << " jacobian " << format_double(j2);
    v.require(g1 <= tol::kGapS1, "S1 gap");
    v.require(g2 <= tol::kGapPerturbed, "perturbed gap");
    v.require(j1 <= tol::kJacobian && j2 <= tol::kJacobian, "jacobian identity");
}

void lemma1_suite(Verdict& v) {
    const auto t0 = std::chrono::steady_clock::now();
    for (double alpha : {0.25, 0.5, 0.75}) {
        cli::Lemma1Setup setup;
        setup.alpha = alpha;
        const auto studies = cli::run_lemma1(setup);
        const double tols[3] = {tol::kSlopeF, tol::kSlopeGrad, tol::kSlopeR};
        v.detail << "alpha " << format_double(alpha) << ":";
        for (std::size_t k = 0; k < 3; ++k) {
            const auto& s = studies[k];
            const bool slope_ok = std::abs(s.fitted_slope - s.predicted_slope) <= tols[k];
            const bool fit_ok = s.r2 >= tol::kR2;
            v.detail << " " << s.label << " " << format_double(std::round(s.fitted_slope * 1000.0) / 1000.0) << " (want "
                     << format_double(s.predicted_slope) << ", R2 " << format_double(std::round(s.r2 * 1000.0) / 1000.0)
                     << ")";
            v.require(slope_ok, "alpha " + format_double(alpha) + " " + s.label + " slope");
            v.require(fit_ok, "alpha " + format_double(alpha) + " " + s.label + " R2");
        }
        v.detail << "; ";
    }
    const double elapsed = seconds_since(t0);
    v.detail << "runtime " << format_double(std::round(elapsed * 100.0) / 100.0) << " s";
    v.require(elapsed <= tol::kLemma1Seconds, "runtime");
}

void product_suite(Verdict& v) {
    const auto r = cli::product_identity_suite(kSeed, 10, 3, tol::kProduct);
    v.detail << r.entries.size() << " pairs, max defect " << format_double(worst(r));
    v.require(r.entries.size() == 13, "10 smooth and 3 rough pairs");
    v.require(r.passed(), "defect");
}

void lemma2_suite(Verdict& v) {
    const auto r = cli::lemma2_suite(kSeed, tol::kLemma2);
    for (const auto& e : r.entries) v.detail << e.label << " " << format_double(e.value) << "; ";
    v.require(r.passed(), "divergence");
}

void flux_suite(Verdict& v) {
    for (double alpha : {0.5, 0.25}) {
        cli::FluxSetup setup;
        setup.alpha = alpha;
        const auto res = cli::run_flux(setup);
        const double defect = std::max(res.momentum.identity_defect, res.bernoulli.identity_defect);
        const double j = res.momentum.bounds[1].fitted_slope;
        const double l = res.bernoulli.bounds[1].fitted_slope;
        v.detail << "alpha " << format_double(alpha) << ": identity defect " << format_double(defect) << ", J slope "
                 << format_double(std::round(j * 1000.0) / 1000.0) << ", L slope "
                 << format_double(std::round(l * 1000.0) / 1000.0) << "; ";
        v.require(defect <= tol::kFluxIdentity, "identity at alpha " + format_double(alpha));
        if (alpha > 1.0 / 3.0) {
            v.require(j >= tol::kDecayingSlope && l >= tol::kDecayingSlope, "decay at alpha 0.5");
        } else {
            v.require(j <= tol::kFlatSlope && l <= tol::kFlatSlope, "no decay at alpha 0.25");
            v.require(res.momentum.verdict.find("inconclusive") != std::string::npos &&
                          res.bernoulli.verdict.find("inconclusive") != std::string::npos,
                      "inconclusive label");
            v.detail << "label \"" << res.momentum.verdict << "\"";
        }
    }
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"wavekit"};
    for (const auto& s : args) argv.push_back(s.c_str());
    std::ostringstream out, err;
    return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

void determinism_suite(Verdict& v) {
    const fs::path root = fs::temp_directory_path() / "wavekit_acceptance_determinism";
    std::vector<std::vector<std::string>> commands = {
        {"synth", "--family", "laminar", "--gamma0", "1"},
        {"synth", "--family", "weierstrass", "--alpha", "0.5", "--octaves", "12", "--n", "512"},
        {"synth", "--family", "perturbed", "--gamma0", "1", "--alpha", "0.5", "--delta", "0.02", "--octaves", "8",
         "--nx", "512", "--ny", "257"},
        {"transform", "--input", "@/velocity.wvk", "--to", "height", "--roundtrip"},
        {"verify", "--input", "@/velocity.wvk", "--input", "@/stream.wvk", "--input", "@/height.wvk"},
        {"equivalence", "--input", "@/perturbed_stream.wvk"},
        {"ratestudy", "--study", "lemma1", "--alpha", "0.5"},
        {"ratestudy", "--study", "product"},
        {"ratestudy", "--study", "lemma2"},
        {"ratestudy", "--study", "flux", "--alpha", "0.5", "--kmax", "6"},
    };
    std::vector<std::string> names[2];
    for (int rep = 0; rep < 2; ++rep) {
        std::size_t step = 0;
        const fs::path dir = root / ("run" + std::to_string(rep));
        fs::remove_all(dir);
        fs::create_directories(dir);
        for (auto cmd : commands) {
            for (auto& a : cmd)
                if (a.rfind("@/", 0) == 0) a = (dir / a.substr(2)).string();
            std::vector<std::string> args{"--out", dir.string(), "--seed", "7"};
            args.insert(args.end(), cmd.begin(), cmd.end());
            const int code = run_cli(args);
            if (code != cli::kOk && code != cli::kVerifyFailed) v.require(false, cmd[0] + " exit " + std::to_string(code));
            for (const auto& e : fs::directory_iterator(dir)) {
                if (!e.is_regular_file()) continue;
                const auto name = e.path().filename().string();
                if (name.find("snap_") == 0) continue;
                const auto snap = dir / ("snap_" + std::to_string(step) + "_" + name);
                fs::copy_file(e.path(), snap, fs::copy_options::overwrite_existing);
                names[rep].push_back(snap.filename().string());
            }
            ++step;
        }
        std::sort(names[rep].begin(), names[rep].end());
    }
    std::size_t compared = 0, differing = 0;
    v.require(names[0] == names[1], "same set of outputs");
    for (const auto& n : names[0]) {
        ++compared;
        if (slurp(root / "run0" / n) != slurp(root / "run1" / n)) {
            ++differing;
            v.require(false, n + " differs");
        }
    }
    v.detail << commands.size() << " commands, " << compared << " outputs compared, " << differing << " differ";
}

}  // namespace

int main() {
    numerics::set_thread_count(1);
    struct Criterion {
        const char* name;
        std::function<void(Verdict&)> check;
    };
    const std::vector<Criterion> criteria = {
        {"exact-solution suite", exact_suite},
        {"round-trip suite", round_trip_suite},
        {"equivalence audit", equivalence_suite},
        {"Lemma 1 rates", lemma1_suite},
        {"product identity", product_suite},
        {"Lemma 2 divergence", lemma2_suite},
        {"flux threshold study", flux_suite},
        {"determinism", determinism_suite},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Verdict v;
        try {
            c.check(v);
        } catch (const std::exception& e) {
            v.require(false, std::string("exception: ") + e.what());
        }
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS " : "FAIL ") << c.name << ": " << v.detail.str() << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
