#include "wavekit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavekit/io.hpp"
#include "wavekit/mollification.hpp"
#include "wavekit/synth.hpp"
#include "wavekit/transforms.hpp"

namespace wavekit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<RateStudy> run_lemma1(const Lemma1Setup& setup) {
    RoughFieldSpec spec;
    spec.alpha = setup.alpha;
    spec.octaves = setup.octaves;
    spec.seed = setup.seed;
    spec.base_wavenumber = setup.base_wavenumber;
    const WeierstrassField field(spec, 1);
    const double eps0 = setup.kappa_eps0 / setup.base_wavenumber;
    const RegionSpec region = interval_region(setup.half_width + 2.0 * eps0 * (1.0 + 1e-12), setup.half_width, setup.nodes);
    Lemma1Config config;
    config.eps = eps_sweep(eps0, setup.kmin, setup.kmax);
    config.bandwidth = field.bandwidth();
    config.drop_largest = setup.drop_largest;
    const ScalarField f = [&field](Point p) { return field(p.x); };
    return lemma1_study(f, 1, region, setup.alpha, config);
}

FluxResult run_flux(const FluxSetup& setup) {
    LaminarSpec spec;
    spec.gamma0 = setup.gamma0;
    const LaminarTriple base = laminar(spec);
    const RoughFieldSpec rough = normalized_rough(setup.alpha, setup.octaves, setup.seed, setup.base_wavenumber);
    const PerturbedLaminar fields(spec, rough, setup.delta);
    TestFunction phi;
    phi.center = setup.center;
    phi.radius = setup.radius;
    phi.period = spec.L;
    phi.label = "flux-phi";
    const RegionSpec region = support_region(base.stream.grid, phi);
    FluxStudyConfig config;
    config.eps = eps_sweep(setup.eps0 > 0.0 ? setup.eps0 : region.eps0, setup.kmin, setup.kmax);
    config.alpha = setup.alpha;
    config.drop_largest = setup.drop_largest;
    if (setup.eps0 > 0.0 && !(config.eps.front() < region.eps0))
        throw InvalidInput("RegionSpec admits eps below " + format_double(region.eps0) + " only; sweep starts at " +
                           format_double(config.eps.front()));
    FluxResult out;
    out.region_eps0 = region.eps0;
    out.momentum = flux_study_momentum(fields, region, phi, config);
    out.bernoulli = flux_study_bernoulli(fields, region, phi, config);
    return out;
}

StreamSolution perturbed_laminar(const PerturbSetup& setup) {
    LaminarSpec spec;
    spec.gamma0 = setup.gamma0;
    spec.nx = setup.nx;
    spec.ny = setup.nx / 2 + 1;
    const LaminarTriple base = laminar(spec);
    return perturb(base.stream, normalized_rough(setup.alpha, setup.octaves, setup.seed, setup.base_wavenumber),
                   setup.delta);
}

namespace {

/// Region K = [2, 3] x [0.3, 0.7] inside the unit-depth fluid, eps0 = 0.15.
RegionSpec plane_region() {
    LaminarSpec spec;
    spec.nx = 64;
    spec.ny = 33;
    const LaminarTriple t = laminar(spec);
    return interior_region(t.stream.grid, Rect{2.0, 3.0, 0.3, 0.7});
}

struct Trig {
    double a[3], k[3], l[3], ph[3];
    double operator()(Point p) const {
        double s = 0.0;
        for (int m = 0; m < 3; ++m) s += a[m] * std::cos(k[m] * p.x + l[m] * p.y + ph[m]);
        return s;
    }
};

Trig random_trig(numerics::Rng& rng) {
    Trig t{};
    for (int m = 0; m < 3; ++m) {
        t.a[m] = rng.uniform(-1.0, 1.0);
        t.k[m] = std::floor(rng.uniform(1.0, 5.0));
        t.l[m] = std::floor(rng.uniform(1.0, 5.0));
        t.ph[m] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return t;
}

RoughFieldSpec plane_rough(double alpha, std::uint64_t seed) {
    RoughFieldSpec s;
    s.alpha = alpha;
    s.octaves = 8;
    s.seed = seed;
    return s;
}

}  // namespace

ResidualReport product_identity_suite(std::uint64_t seed, std::size_t smooth, std::size_t rough, double threshold) {
    const RegionSpec region = plane_region();
    const double eps = 0.05;
    ResidualReport r;
    r.title = "product identity (fg)^eps = f^eps g^eps + R^eps(f, g)";
    numerics::Rng rng(seed);
    for (std::size_t k = 0; k < smooth; ++k) {
        const Trig f = random_trig(rng), g = random_trig(rng);
        const MollifierKernel kernel(2, eps, resolving_nodes(8.0, eps));
        r.add_max("smooth pair " + std::to_string(k), product_identity_defect(f, g, kernel, region), threshold);
    }
    const double alphas[3] = {0.3, 0.5, 0.7};
    for (std::size_t k = 0; k < rough; ++k) {
        const WeierstrassField f(plane_rough(alphas[k % 3], seed + 101 + 2 * k), 2);
        const WeierstrassField g(plane_rough(alphas[(k + 1) % 3], seed + 102 + 2 * k), 2);
        const MollifierKernel kernel(2, eps, resolving_nodes(std::max(f.bandwidth(), g.bandwidth()), eps));
        const ScalarField fs = [&f](Point p) { return f(p.x, p.y); };
        const ScalarField gs = [&g](Point p) { return g(p.x, p.y); };
        r.add_max("rough pair " + std::to_string(k), product_identity_defect(fs, gs, kernel, region), threshold);
    }
    return r;
}

ResidualReport lemma2_suite(std::uint64_t seed, double threshold) {
    const RegionSpec region = plane_region();
    const std::vector<double> sweep = eps_sweep(region.eps0);
    ResidualReport r;
    r.title = "divergence of mollified solenoidal fields";

    numerics::Rng rng(seed);
    const Trig psi = random_trig(rng);
    std::vector<ScalarField> smooth{[&psi](Point p) {
                                        double s = 0.0;
                                        for (int m = 0; m < 3; ++m)
                                            s -= psi.a[m] * psi.l[m] * std::sin(psi.k[m] * p.x + psi.l[m] * p.y + psi.ph[m]);
                                        return s;
                                    },
                                    [&psi](Point p) {
                                        double s = 0.0;
                                        for (int m = 0; m < 3; ++m)
                                            s += psi.a[m] * psi.k[m] * std::sin(psi.k[m] * p.x + psi.l[m] * p.y + psi.ph[m]);
                                        return s;
                                    }};
    const WeierstrassField w(plane_rough(0.5, seed + 201), 2);
    std::vector<ScalarField> rough{[&w](Point p) { return w(p.x, p.y); }, [&w](Point p) { return -w.A_x(p.x, p.y); }};

    const auto sweep_entry = [&](const std::string& label, const std::vector<ScalarField>& fields, double bandwidth) {
        std::vector<double> values;
        for (double eps : sweep) {
            const MollifierKernel kernel(2, eps, resolving_nodes(bandwidth, eps, 64));
            values.push_back(lemma2_check(fields, kernel, region));
        }
        auto& e = r.add_max(label, *std::max_element(values.begin(), values.end()), threshold);
        e.per_test = values;
        e.note = "max over the eps sweep of max_K |div f^eps|";
    };
    sweep_entry("smooth solenoidal pair", smooth, 8.0);
    sweep_entry("rough solenoidal pair", rough, w.bandwidth());
    return r;
}

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string out = ".";
    std::size_t threads = 0;
    std::uint64_t seed = 7;
    double tol_scale = 1.0;
};

fs::path output(const Globals& g, const std::string& name) {
    fs::create_directories(g.out);
    return fs::path(g.out) / name;
}

void write_report(const Globals& g, const std::string& stem, const json& j, const std::string& csv) {
    write_text_atomic(output(g, stem + ".json"), j.dump(2) + "\n");
    write_text_atomic(output(g, stem + ".csv"), csv);
}

std::string extension(const std::string& format) {
    if (format == "binary") return ".wvk";
    if (format == "json") return ".json";
    throw UsageError("unknown --format " + format + " (binary or json)");
}

json report_json(const std::vector<ResidualReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    return arr;
}

std::string reports_csv(const std::vector<ResidualReport>& reports) {
    std::string s;
    for (std::size_t k = 0; k < reports.size(); ++k) {
        std::string c = to_csv(reports[k]);
        if (k > 0) c = c.substr(c.find('\n') + 1);
        s += c;
    }
    return s;
}

bool all_pass(const std::vector<ResidualReport>& reports) {
    return std::all_of(reports.begin(), reports.end(), [](const ResidualReport& r) { return r.passed(); });
}

void require_invariants(const ResidualReport& inv, const std::string& what) {
    std::string failed;
    for (const auto& e : inv.entries)
        if (!e.pass) failed += (failed.empty() ? "" : ", ") + e.label + " (" + format_double(e.value) + ")";
    if (!failed.empty()) throw InvariantViolation(what + " violates " + failed);
}

/// The sign condition that makes the hodograph map invertible.
void require_sign(const ResidualReport& inv, const std::string& what) {
    for (const auto& e : inv.entries)
        if ((e.label == "u<c" || e.label == "psi_y<0" || e.label == "h_p>0") && !e.pass)
            throw InvariantViolation(what + " violates " + e.label + " (" + format_double(e.value) + ")");
}

ResidualReport invariants_of(const AnySolution& s) {
    return std::visit(
        [](const auto& v) -> ResidualReport {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, FieldData>)
                throw UsageError("a synthetic field file is not a flow solution");
            else
                return check_invariants(v);
        },
        s);
}

/// Runs fn, prefixing any failure with the stage label.
template <class F>
auto staged(const std::string& stage, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const InvariantViolation& e) {
        throw InvariantViolation("stage " + stage + ": " + e.what());
    } catch (const InvalidInput& e) {
        throw InvalidInput("stage " + stage + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError("stage " + stage + ": " + e.what(), e.byte_offset());
    }
}

VelocitySolution as_velocity(const AnySolution& s, const TransformOptions& opt) {
    if (const auto* v = std::get_if<VelocitySolution>(&s)) return *v;
    if (const auto* st = std::get_if<StreamSolution>(&s)) return stream_to_velocity(*st, opt).velocity;
    if (const auto* h = std::get_if<HeightSolution>(&s)) return stream_to_velocity(height_to_stream(*h, opt), opt).velocity;
    throw UsageError("a synthetic field file is not a flow solution");
}

StreamSolution as_stream(const AnySolution& s, const TransformOptions& opt) {
    if (const auto* v = std::get_if<VelocitySolution>(&s)) return velocity_to_stream(*v, opt).stream;
    if (const auto* st = std::get_if<StreamSolution>(&s)) return *st;
    if (const auto* h = std::get_if<HeightSolution>(&s)) return height_to_stream(*h, opt);
    throw UsageError("a synthetic field file is not a flow solution");
}

AnySolution convert(const AnySolution& s, const std::string& to, const TransformOptions& opt) {
    if (to == "velocity") return as_velocity(s, opt);
    if (to == "stream") return as_stream(s, opt);
    if (to == "height") {
        if (const auto* h = std::get_if<HeightSolution>(&s)) return *h;
        return stream_to_height(as_stream(s, opt), opt);
    }
    throw UsageError("unknown formulation " + to + " (velocity, stream or height)");
}

/// Sup-norm differences of matching arrays, as report entries.
void add_defects(ResidualReport& r, const AnySolution& a, const AnySolution& b, double threshold) {
    const auto add = [&](const std::string& name, const NodalField& x, const NodalField& y) {
        if (!x.same_shape(y)) throw InvalidInput("round trip changed the grid of " + name);
        r.add_max("roundtrip " + name, max_abs_diff(x, y), threshold);
    };
    if (const auto* v = std::get_if<VelocitySolution>(&a)) {
        const auto& w = std::get<VelocitySolution>(b);
        add("u", v->u, w.u);
        add("v", v->v, w.v);
        add("P", v->P, w.P);
    } else if (const auto* s = std::get_if<StreamSolution>(&a)) {
        add("psi", s->psi, std::get<StreamSolution>(b).psi);
    } else if (const auto* h = std::get_if<HeightSolution>(&a)) {
        add("h", h->h, std::get<HeightSolution>(b).h);
    }
}

struct SynthOptions {
    std::string family;
    std::string format = "binary";
    LaminarSpec laminar;
    double alpha = 0.0;
    std::size_t octaves = 12;
    double base_wavenumber = 0.0;
    int dimension = 1;
    std::size_t n = 1024;
    double delta = 0.02;
    CLI::Option* alpha_opt = nullptr;
};

json laminar_metadata(const LaminarSpec& s) {
    return {{"generator", "laminar"}, {"depth", s.depth}, {"c", s.c},         {"g", s.g},   {"P_atm", s.P_atm},
            {"L", s.L},               {"u_bed", s.u_bed}, {"gamma0", s.gamma0}, {"nx", s.nx}, {"ny", s.ny}};
}

int cmd_synth(const Globals& g, SynthOptions& o, std::ostream& out) {
    const std::string ext = extension(o.format);
    std::vector<std::string> written;
    const auto save = [&](const std::string& name, AnySolution s, const json& meta) {
        const fs::path p = output(g, name + ext);
        write_solution(p, SolutionFile{std::move(s), meta});
        written.push_back(p.string());
    };
    if (o.family == "laminar") {
        const LaminarTriple t = laminar(o.laminar);
        const json meta = laminar_metadata(o.laminar);
        save("velocity", t.velocity, meta);
        save("stream", t.stream, meta);
        save("height", t.height, meta);
    } else if (o.family == "weierstrass" || o.family == "perturbed") {
        if (o.alpha_opt->count() == 0) throw UsageError("--alpha is required for family " + o.family);
        if (o.family == "weierstrass") {
            RoughFieldSpec spec;
            spec.alpha = o.alpha;
            spec.octaves = o.octaves;
            spec.seed = g.seed;
            spec.period = o.laminar.L;
            spec.base_wavenumber = o.base_wavenumber;
            if (o.dimension != 1 && o.dimension != 2) throw UsageError("--dimension must be 1 or 2");
            FieldData fd{weierstrass(spec, o.dimension, o.n), spec.period, o.dimension};
            save("weierstrass", fd,
                 {{"generator", "weierstrass"}, {"alpha", o.alpha}, {"octaves", o.octaves}, {"seed", g.seed},
                  {"base_wavenumber", spec.kappa0()}, {"dimension", o.dimension}, {"n", o.n}});
        } else {
            const LaminarTriple t = laminar(o.laminar);
            const double base = o.base_wavenumber > 0.0 ? o.base_wavenumber : 2.0 * std::numbers::pi / o.laminar.L;
            const RoughFieldSpec rough = normalized_rough(o.alpha, o.octaves, g.seed, base);
            json meta = laminar_metadata(o.laminar);
            meta["generator"] = "perturbed laminar";
            meta["alpha"] = o.alpha;
            meta["octaves"] = o.octaves;
            meta["seed"] = g.seed;
            meta["base_wavenumber"] = base;
            meta["delta"] = o.delta;
            save("perturbed_stream", perturb(t.stream, rough, o.delta), meta);
        }
    } else {
        throw UsageError("unknown --family " + o.family + " (laminar, weierstrass or perturbed)");
    }
    for (const auto& w : written) out << "wrote " << w << "\n";
    return kOk;
}

struct TransformCmd {
    std::string input;
    std::string to;
    std::string format = "binary";
    bool roundtrip = false;
    double roundtrip_tol = 1e-5;
    TransformOptions opt;
};

int cmd_transform(const Globals& g, const TransformCmd& o, std::ostream& out) {
    const SolutionFile in = read_solution(o.input);
    const std::string from = formulation_name(in.solution);
    require_invariants(invariants_of(in.solution), "input " + from + " solution");
    const AnySolution result = staged(from + "->" + o.to, [&] { return convert(in.solution, o.to, o.opt); });

    ResidualReport r;
    r.title = "transform " + from + " -> " + o.to;
    r.append(invariants_of(result), o.to + ": ");
    if (const auto* s = std::get_if<StreamSolution>(&result)) {
        if (const auto* h = std::get_if<HeightSolution>(&in.solution)) r.append(chain_rule_audit(*s, *h, o.opt));
    }
    if (const auto* h = std::get_if<HeightSolution>(&result)) {
        const StreamSolution s = as_stream(in.solution, o.opt);
        r.append(chain_rule_audit(s, *h, o.opt));
    }
    if (o.roundtrip) {
        const AnySolution back = staged(o.to + "->" + from, [&] { return convert(result, from, o.opt); });
        add_defects(r, in.solution, back, o.roundtrip_tol * g.tol_scale);
    }
    json meta = in.metadata;
    meta["transform"] = {{"from", from}, {"to", o.to}};
    const fs::path p = output(g, o.to + extension(o.format));
    write_solution(p, SolutionFile{result, meta});
    write_report(g, "transform", to_json(r), to_csv(r));
    out << "wrote " << p.string() << "\n" << r.title << ": " << (r.passed() ? "pass" : "FAIL") << "\n";
    return r.passed() ? kOk : kVerifyFailed;
}

struct VerifyCmd {
    std::vector<std::string> inputs;
    std::size_t radii = 3;
    std::size_t centres = 4;
    double threshold = kWeakThreshold;
    bool zero_gamma = false;
    TransformOptions opt;
};

int cmd_verify(const Globals& g, const VerifyCmd& o, std::ostream& out) {
    std::vector<ResidualReport> reports;
    bool invariants_ok = true;
    const double thr = o.threshold * g.tol_scale;
    for (const auto& path : o.inputs) {
        SolutionFile in = read_solution(path);
        const std::string stem = fs::path(path).stem().string();
        const std::string name = formulation_name(in.solution);
        if (o.zero_gamma) {
            if (auto* s = std::get_if<StreamSolution>(&in.solution)) s->gamma = zero_vorticity(s->params.p0, s->gamma.p.size());
            if (auto* h = std::get_if<HeightSolution>(&in.solution)) h->gamma = zero_vorticity(h->params.p0, h->gamma.p.size());
        }
        ResidualReport inv = invariants_of(in.solution);
        inv.title = stem + ": invariants, " + name + " formulation";
        invariants_ok = invariants_ok && inv.passed();
        reports.push_back(inv);
        const auto push = [&](ResidualReport r) {
            r.title = stem + ": " + r.title;
            reports.push_back(std::move(r));
        };
        if (const auto* v = std::get_if<VelocitySolution>(&in.solution)) {
            const auto tests = fluid_battery(v->grid, g.seed, o.radii, o.centres);
            push(weak_residual_velocity(*v, tests, thr));
            if (v->smooth) push(classical_residuals(*v, thr));
            const StreamSolution s = staged("velocity->stream", [&] { return velocity_to_stream(*v, o.opt).stream; });
            const BernoulliField bf = bernoulli_field(*v, s, o.opt);
            push(streamline_flux(bf, strip_battery(bf.strip, g.seed, o.radii, o.centres), thr));
        } else if (const auto* s = std::get_if<StreamSolution>(&in.solution)) {
            push(weak_residual_stream(*s, fluid_battery(s->grid, g.seed, o.radii, o.centres), thr));
            if (s->smooth) push(classical_residuals(*s, thr));
        } else if (const auto* h = std::get_if<HeightSolution>(&in.solution)) {
            push(weak_residual_height(*h, strip_battery(h->grid, g.seed, o.radii, o.centres), thr));
            if (h->smooth) push(classical_residuals(*h, thr));
        } else {
            throw UsageError("verify needs a flow solution; " + path + " holds a synthetic field");
        }
    }
    write_report(g, "verify", report_json(reports), reports_csv(reports));
    const bool ok = all_pass(reports);
    for (const auto& r : reports) out << r.title << ": " << (r.passed() ? "pass" : "FAIL") << "\n";
    if (!invariants_ok) return kInvariant;
    return ok ? kOk : kVerifyFailed;
}

struct RateCmd {
    std::string study;
    std::vector<double> alphas;
    Lemma1Setup lemma1;
    FluxSetup flux;
};

json study_json(const std::vector<RateStudy>& studies) {
    json arr = json::array();
    for (const auto& s : studies) arr.push_back(to_json(s));
    return arr;
}

std::vector<RateStudy> prefixed(std::vector<RateStudy> v, const std::string& prefix) {
    for (auto& s : v) s.label = prefix + s.label;
    return v;
}

int cmd_ratestudy(const Globals& g, RateCmd& o, std::ostream& out) {
    if (o.study == "lemma1") {
        std::vector<RateStudy> all;
        json j = json::array();
        for (double a : o.alphas.empty() ? std::vector<double>{0.5} : o.alphas) {
            Lemma1Setup s = o.lemma1;
            s.alpha = a;
            s.seed = g.seed;
            auto studies = prefixed(run_lemma1(s), "alpha=" + format_double(a) + " ");
            j.push_back({{"alpha", a}, {"studies", study_json(studies)}});
            all.insert(all.end(), studies.begin(), studies.end());
        }
        write_report(g, "ratestudy", {{"study", "lemma1"}, {"runs", j}}, to_csv(all));
        for (const auto& s : all) out << s.label << ": slope " << format_double(s.fitted_slope) << "\n";
        return kOk;
    }
    if (o.study == "flux") {
        std::vector<RateStudy> all;
        json j = json::array();
        for (double a : o.alphas.empty() ? std::vector<double>{0.25, 0.5} : o.alphas) {
            FluxSetup s = o.flux;
            s.alpha = a;
            s.seed = g.seed;
            const FluxResult res = run_flux(s);
            const std::string prefix = "alpha=" + format_double(a) + " ";
            json run = {{"alpha", a}, {"region_eps0", res.region_eps0}};
            for (const auto* st : {&res.momentum, &res.bernoulli}) {
                const bool mom = st == &res.momentum;
                auto terms = prefixed(st->signed_terms, prefix);
                auto bounds = prefixed(st->bounds, prefix);
                run[mom ? "momentum" : "bernoulli"] = {{"target", st->target},
                                                       {"identity_defect", st->identity_defect},
                                                       {"min_minus_psi_y_eps", st->min_psi_y_floor},
                                                       {"verdict", st->verdict},
                                                       {"signed_terms", study_json(terms)},
                                                       {"bounds", study_json(bounds)}};
                all.insert(all.end(), terms.begin(), terms.end());
                all.insert(all.end(), bounds.begin(), bounds.end());
                out << prefix << (mom ? "J" : "L") << " bound slope " << format_double(st->bounds[1].fitted_slope) << " ("
                    << st->verdict << ")\n";
            }
            j.push_back(run);
        }
        write_report(g, "ratestudy", {{"study", "flux"}, {"runs", j}}, to_csv(all));
        return kOk;
    }
    if (o.study == "product" || o.study == "lemma2") {
        const ResidualReport r =
            o.study == "product" ? product_identity_suite(g.seed, 10, 3, 1e-8 * g.tol_scale) : lemma2_suite(g.seed, 1e-8 * g.tol_scale);
        write_report(g, "ratestudy", to_json(r), to_csv(r));
        out << r.title << ": " << (r.passed() ? "pass" : "FAIL") << "\n";
        return r.passed() ? kOk : kVerifyFailed;
    }
    throw UsageError("unknown --study " + o.study + " (lemma1, flux, product or lemma2)");
}

struct EquivalenceCmd {
    std::string input;
    std::size_t radii = 3;
    std::size_t centres = 4;
    double threshold = kWeakThreshold;
    double gap_threshold = 1e-6;
    double roundtrip_tol = 1e-5;
    TransformOptions opt;
};

int cmd_equivalence(const Globals& g, const EquivalenceCmd& o, std::ostream& out) {
    const SolutionFile in = read_solution(o.input);
    const std::string from = formulation_name(in.solution);
    const ResidualReport input_inv = invariants_of(in.solution);
    require_sign(input_inv, "input " + from + " solution");
    const double thr = o.threshold * g.tol_scale;

    std::vector<std::pair<std::string, ResidualReport>> stages;
    stages.emplace_back("input " + from + " invariants", input_inv);
    const VelocitySolution v0 = staged("input->(i)", [&] { return as_velocity(in.solution, o.opt); });
    const auto fb = fluid_battery(v0.grid, g.seed, o.radii, o.centres);
    stages.emplace_back("(i) velocity", weak_residual_velocity(v0, fb, thr));

    const StreamSolution s1 = staged("(i)->(ii)", [&] { return velocity_to_stream(v0, o.opt).stream; });
    stages.emplace_back("(ii) stream", weak_residual_stream(s1, fb, thr));

    const HeightSolution h = staged("(ii)->(iii)", [&] { return stream_to_height(s1, o.opt); });
    stages.emplace_back("(iii) height", weak_residual_height(h, strip_battery(h.grid, g.seed, o.radii, o.centres), thr));
    stages.emplace_back("(ii)<->(iii) pullback",
                        staged("(ii)<->(iii)", [&] { return equivalence_audit(s1, fb, o.gap_threshold * g.tol_scale, o.opt); }));

    const StreamSolution s2 = staged("(iii)->(ii)", [&] { return height_to_stream(h, o.opt); });
    ResidualReport back_stream = weak_residual_stream(s2, fb, thr);
    back_stream.add_max("roundtrip psi", max_abs_diff(s2.psi, s1.psi), o.roundtrip_tol * g.tol_scale);
    stages.emplace_back("(ii) stream, returned", back_stream);

    const VelocitySolution v2 = staged("(ii)->(i)", [&] { return stream_to_velocity(s2, o.opt).velocity; });
    ResidualReport back_velocity = weak_residual_velocity(v2, fb, thr);
    add_defects(back_velocity, AnySolution{v0}, AnySolution{v2}, o.roundtrip_tol * g.tol_scale);
    stages.emplace_back("(i) velocity, returned", back_velocity);

    json matrix = json::array();
    std::string csv = "stage,check,value,threshold,pass\n";
    bool ok = true;
    for (const auto& [stage, r] : stages) {
        for (const auto& e : r.entries) {
            matrix.push_back({{"stage", stage}, {"check", e.label}, {"value", e.value}, {"threshold", e.threshold}, {"pass", e.pass}});
            csv += stage + "," + e.label + "," + format_double(e.value) + "," + format_double(e.threshold) + "," +
                   (e.pass ? "1" : "0") + "\n";
        }
        ok = ok && r.passed();
        out << stage << ": " << (r.passed() ? "pass" : "FAIL") << "\n";
    }
    write_report(g, "equivalence", {{"input", from}, {"pass", ok}, {"matrix", matrix}}, csv);
    return ok ? kOk : kVerifyFailed;
}

void add_transform_options(CLI::App* app, TransformOptions& opt) {
    app->add_option("--path-tolerance", opt.path_tolerance, "largest accepted path-independence defect")
        ->capture_default_str();
    app->add_option("--levels", opt.levels, "vertical node count of generated grids (0 keeps the source count)")
        ->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weak-formulation checks for steady periodic water waves", "wavekit"};
    app.set_config("--config", "", "key = value configuration file; command-line flags override it");
    app.require_subcommand(1);
    Globals g;
    auto* threads = app.add_option("--threads", g.threads, "worker threads (default: WAVEKIT_THREADS, else 1)");
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--seed", g.seed, "seed for test batteries and rough fields")->capture_default_str();
    app.add_option("--tol-scale", g.tol_scale, "multiplier applied to pass thresholds")->capture_default_str();

    SynthOptions so;
    auto* synth = app.add_subcommand("synth", "generate laminar solutions, Weierstrass fields or perturbed flows");
    synth->add_option("--family", so.family, "laminar, weierstrass or perturbed")->required();
    synth->add_option("--format", so.format, "binary or json")->capture_default_str();
    synth->add_option("--depth", so.laminar.depth)->capture_default_str();
    synth->add_option("--c", so.laminar.c, "wave speed")->capture_default_str();
    synth->add_option("--g", so.laminar.g, "gravity")->capture_default_str();
    synth->add_option("--p-atm", so.laminar.P_atm)->capture_default_str();
    synth->add_option("--length", so.laminar.L, "period L")->capture_default_str();
    synth->add_option("--u-bed", so.laminar.u_bed)->capture_default_str();
    synth->add_option("--gamma0", so.laminar.gamma0, "constant vorticity")->capture_default_str();
    synth->add_option("--nx", so.laminar.nx)->capture_default_str();
    synth->add_option("--ny", so.laminar.ny)->capture_default_str();
    so.alpha_opt = synth->add_option("--alpha", so.alpha, "Hoelder exponent of the rough field");
    synth->add_option("--octaves", so.octaves)->capture_default_str();
    synth->add_option("--base-wavenumber", so.base_wavenumber, "octave-0 wavenumber (0: 2 pi / L)")->capture_default_str();
    synth->add_option("--dimension", so.dimension, "1 or 2 (weierstrass)")->capture_default_str();
    synth->add_option("--n", so.n, "samples per axis (weierstrass)")->capture_default_str();
    synth->add_option("--delta", so.delta, "perturbation size (perturbed)")->capture_default_str();

    TransformCmd to;
    auto* transform = app.add_subcommand("transform", "map a solution file to another formulation");
    transform->add_option("--input", to.input)->required();
    transform->add_option("--to", to.to, "velocity, stream or height")->required();
    transform->add_option("--format", to.format, "binary or json")->capture_default_str();
    transform->add_flag("--roundtrip", to.roundtrip, "map back and report sup-norm defects");
    transform->add_option("--roundtrip-tol", to.roundtrip_tol)->capture_default_str();
    add_transform_options(transform, to.opt);

    VerifyCmd vo;
    auto* verify = app.add_subcommand("verify", "invariants, weak and classical residuals of solution files");
    verify->add_option("--input", vo.inputs, "solution files")->required();
    verify->add_option("--radii", vo.radii, "test-function radii per battery")->capture_default_str();
    verify->add_option("--centres", vo.centres, "test-function centres per radius")->capture_default_str();
    verify->add_option("--threshold", vo.threshold, "normalised weak residual threshold")->capture_default_str();
    verify->add_flag("--zero-gamma", vo.zero_gamma, "replace the vorticity profile by zero (negative control)");
    add_transform_options(verify, vo.opt);

    RateCmd ro;
    auto* rate = app.add_subcommand("ratestudy", "mollification rates and flux studies");
    rate->add_option("--study", ro.study, "lemma1, flux, product or lemma2")->required();
    rate->add_option("--alpha", ro.alphas, "Hoelder exponents (repeatable)");
    rate->add_option("--octaves", ro.lemma1.octaves)->capture_default_str();
    rate->add_option("--lemma1-base-wavenumber", ro.lemma1.base_wavenumber)->capture_default_str();
    rate->add_option("--kappa-eps0", ro.lemma1.kappa_eps0, "base wavenumber times eps0 (lemma1)")->capture_default_str();
    rate->add_option("--nodes", ro.lemma1.nodes, "nodes on K (lemma1)")->capture_default_str();
    rate->add_option("--flux-base-wavenumber", ro.flux.base_wavenumber)->capture_default_str();
    rate->add_option("--delta", ro.flux.delta, "perturbation size (flux)")->capture_default_str();
    rate->add_option("--gamma0", ro.flux.gamma0)->capture_default_str();
    rate->add_option("--phi-x", ro.flux.center.x)->capture_default_str();
    rate->add_option("--phi-y", ro.flux.center.y)->capture_default_str();
    rate->add_option("--phi-r", ro.flux.radius)->capture_default_str();
    rate->add_option("--eps0", ro.flux.eps0, "sweep top before the 2^-kmin factor (flux; 0 uses the RegionSpec)")
        ->capture_default_str();
    rate->add_option("--kmin", ro.lemma1.kmin)->capture_default_str();
    rate->add_option("--kmax", ro.lemma1.kmax)->capture_default_str();
    rate->add_option("--drop-largest", ro.lemma1.drop_largest)->capture_default_str();

    EquivalenceCmd eo;
    auto* equiv = app.add_subcommand("equivalence", "full cycle velocity -> stream -> height -> stream -> velocity");
    equiv->add_option("--input", eo.input)->required();
    equiv->add_option("--radii", eo.radii)->capture_default_str();
    equiv->add_option("--centres", eo.centres)->capture_default_str();
    equiv->add_option("--threshold", eo.threshold)->capture_default_str();
    equiv->add_option("--gap-threshold", eo.gap_threshold, "paired residual gap threshold")->capture_default_str();
    equiv->add_option("--roundtrip-tol", eo.roundtrip_tol)->capture_default_str();
    add_transform_options(equiv, eo.opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (threads->count() > 0) {
            if (g.threads == 0) throw UsageError("--threads must be positive");
            numerics::set_thread_count(g.threads);
        }
        if (!(g.tol_scale > 0.0)) throw UsageError("--tol-scale must be positive");
        ro.flux.kmin = ro.lemma1.kmin;
        ro.flux.kmax = ro.lemma1.kmax;
        ro.flux.drop_largest = ro.lemma1.drop_largest;
        ro.flux.octaves = ro.lemma1.octaves;
        if (*synth) return cmd_synth(g, so, out);
        if (*transform) return cmd_transform(g, to, out);
        if (*verify) return cmd_verify(g, vo, out);
        if (*rate) return cmd_ratestudy(g, ro, out);
        if (*equiv) return cmd_equivalence(g, eo, out);
        return kUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const InvalidInput& e) {
        err << "invalid input: " << e.what() << "\n";
        return kUsage;
    } catch (const InvariantViolation& e) {
        err << "invariant violation: " << e.what() << "\n";
        return kInvariant;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << "\n";
        return kIo;
    }
}

}  // namespace wavekit::cli
