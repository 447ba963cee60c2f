#include "wavekit/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

namespace wavekit {

IoError::IoError(const std::string& what, std::int64_t offset)
    : std::runtime_error(offset >= 0 ? what + " (byte offset " + std::to_string(offset) + ")" : what), offset_(offset) {}

namespace {

constexpr char kMagic[8] = {'W', 'V', 'K', 'T', '0', '0', '0', '1'};
constexpr std::int64_t kHeaderStart = 16;

using Arrays = std::vector<std::pair<std::string, std::vector<double>>>;

nlohmann::json params_json(const FlowParameters& p) {
    return {{"c", p.c}, {"g", p.g}, {"P_atm", p.P_atm}, {"L", p.L}, {"p0", p.p0}, {"Q", p.Q}, {"B", p.B}};
}

FlowParameters params_from(const nlohmann::json& j) {
    FlowParameters p;
    p.c = j.at("c").get<double>();
    p.g = j.at("g").get<double>();
    p.P_atm = j.at("P_atm").get<double>();
    p.L = j.at("L").get<double>();
    p.p0 = j.at("p0").get<double>();
    p.Q = j.at("Q").get<double>();
    p.B = j.at("B").get<double>();
    return p;
}

void add_gamma(nlohmann::json& h, Arrays& arrays, const VorticityProfile& g) {
    h["gamma"] = {{"p0", g.p.front()}, {"n", g.p.size()}, {"has_gamma", !g.gamma.empty()}};
    arrays.push_back({"Gamma", g.Gamma});
    if (!g.gamma.empty()) arrays.push_back({"gamma", g.gamma});
}

VorticityProfile gamma_from(const nlohmann::json& h, const std::vector<double>& Gamma, const std::vector<double>* gamma) {
    VorticityProfile v;
    const auto& j = h.at("gamma");
    const std::size_t n = j.at("n").get<std::size_t>();
    const double p0 = j.at("p0").get<double>();
    v.p.resize(n);
    for (std::size_t k = 0; k < n; ++k) v.p[k] = p0 * (1.0 - static_cast<double>(k) / static_cast<double>(n - 1));
    v.p.back() = 0.0;
    v.Gamma = Gamma;
    if (gamma) v.gamma = *gamma;
    v.validate();
    return v;
}

void describe(const SolutionFile& file, nlohmann::json& h, Arrays& arrays) {
    h["schema"] = "wavekit-solution";
    h["version"] = 1;
    h["formulation"] = formulation_name(file.solution);
    h["metadata"] = file.metadata;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, VelocitySolution>) {
                h["params"] = params_json(s.params);
                h["grid"] = {{"kind", "fluid"}, {"nx", s.grid.nx()}, {"ny", s.grid.ny()}, {"period", s.grid.period()}};
                h["smooth"] = s.smooth;
                arrays = {{"eta", s.grid.surface.eta}, {"u", s.u.values()}, {"v", s.v.values()}, {"P", s.P.values()}};
            } else if constexpr (std::is_same_v<T, StreamSolution>) {
                h["params"] = params_json(s.params);
                h["grid"] = {{"kind", "fluid"}, {"nx", s.grid.nx()}, {"ny", s.grid.ny()}, {"period", s.grid.period()}};
                h["smooth"] = s.smooth;
                arrays = {{"eta", s.grid.surface.eta}, {"psi", s.psi.values()}};
                add_gamma(h, arrays, s.gamma);
            } else if constexpr (std::is_same_v<T, HeightSolution>) {
                h["params"] = params_json(s.params);
                h["grid"] = {{"kind", "strip"}, {"nq", s.grid.nq()}, {"np", s.grid.np()}, {"period", s.grid.period},
                             {"p0", s.grid.p0}};
                h["smooth"] = s.smooth;
                arrays = {{"h", s.h.values()}};
                add_gamma(h, arrays, s.gamma);
            } else {
                h["grid"] = {{"kind", "field"}, {"nx", s.values.nx()}, {"ny", s.values.ny()}, {"period", s.period},
                             {"dimension", s.dimension}};
                arrays = {{"values", s.values.values()}};
            }
        },
        file.solution);
    nlohmann::json list = nlohmann::json::array();
    for (const auto& [name, data] : arrays) list.push_back({{"name", name}, {"count", data.size()}});
    h["arrays"] = list;
}

NodalField field_from(std::vector<double> data, std::size_t nx, std::size_t ny, const std::string& name) {
    if (data.size() != nx * ny) throw IoError("array '" + name + "' has " + std::to_string(data.size()) + " values, expected " + std::to_string(nx * ny));
    NodalField f(nx, ny);
    f.values() = std::move(data);
    return f;
}

SolutionFile assemble(const nlohmann::json& h, std::map<std::string, std::vector<double>>& arrays) {
    auto take = [&](const std::string& name) -> std::vector<double>& {
        auto it = arrays.find(name);
        if (it == arrays.end()) throw IoError("missing array '" + name + "'");
        return it->second;
    };
    SolutionFile out;
    out.metadata = h.value("metadata", nlohmann::json::object());
    const std::string kind = h.at("formulation").get<std::string>();
    const auto& g = h.at("grid");
    if (kind == "velocity" || kind == "stream") {
        const std::size_t nx = g.at("nx").get<std::size_t>(), ny = g.at("ny").get<std::size_t>();
        const FluidGrid grid = make_fluid_grid(build_surface(g.at("period").get<double>(), take("eta")), ny);
        if (grid.nx() != nx) throw IoError("array 'eta' does not match nx");
        if (kind == "velocity") {
            VelocitySolution s;
            s.params = params_from(h.at("params"));
            s.grid = grid;
            s.u = field_from(take("u"), nx, ny, "u");
            s.v = field_from(take("v"), nx, ny, "v");
            s.P = field_from(take("P"), nx, ny, "P");
            s.smooth = h.value("smooth", true);
            out.solution = std::move(s);
        } else {
            StreamSolution s;
            s.params = params_from(h.at("params"));
            s.grid = grid;
            s.psi = field_from(take("psi"), nx, ny, "psi");
            const bool has = h.at("gamma").value("has_gamma", false);
            s.gamma = gamma_from(h, take("Gamma"), has ? &take("gamma") : nullptr);
            s.smooth = h.value("smooth", true);
            out.solution = std::move(s);
        }
    } else if (kind == "height") {
        HeightSolution s;
        s.params = params_from(h.at("params"));
        const std::size_t nq = g.at("nq").get<std::size_t>(), np = g.at("np").get<std::size_t>();
        s.grid = make_strip_grid(g.at("period").get<double>(), g.at("p0").get<double>(), nq, np);
        s.h = field_from(take("h"), nq, np, "h");
        const bool has = h.at("gamma").value("has_gamma", false);
        s.gamma = gamma_from(h, take("Gamma"), has ? &take("gamma") : nullptr);
        s.smooth = h.value("smooth", true);
        out.solution = std::move(s);
    } else if (kind == "field") {
        FieldData f;
        f.period = g.at("period").get<double>();
        f.dimension = g.at("dimension").get<int>();
        f.values = field_from(take("values"), g.at("nx").get<std::size_t>(), g.at("ny").get<std::size_t>(), "values");
        out.solution = std::move(f);
    } else {
        throw IoError("unknown formulation '" + kind + "'");
    }
    return out;
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + k])) << (8 * k);
    return v;
}

bool is_json_path(const std::filesystem::path& p) { return p.extension() == ".json"; }

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class Fn>
SolutionFile guarded(Fn fn, std::int64_t offset) {
    try {
        return fn();
    } catch (const IoError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed header: ") + e.what(), offset);
    } catch (const InvalidInput& e) {
        throw IoError(std::string("invalid solution data: ") + e.what(), offset);
    }
}

}  // namespace

std::string formulation_name(const AnySolution& s) {
    switch (s.index()) {
        case 0: return "velocity";
        case 1: return "stream";
        case 2: return "height";
        default: return "field";
    }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out) throw IoError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename temporary file onto '" + path.string() + "'");
    }
}

void write_solution(const std::filesystem::path& path, const SolutionFile& file) {
    nlohmann::json h;
    Arrays arrays;
    describe(file, h, arrays);
    if (is_json_path(path)) {
        nlohmann::json data = nlohmann::json::object();
        for (const auto& [name, values] : arrays) data[name] = values;
        h["data"] = data;
        write_text_atomic(path, h.dump(1) + "\n");
        return;
    }
    const std::string header = h.dump();
    std::string out(kMagic, 8);
    put_u64(out, header.size());
    out += header;
    for (const auto& [name, values] : arrays)
        for (double v : values) put_u64(out, std::bit_cast<std::uint64_t>(v));
    write_text_atomic(path, out);
}

SolutionFile read_solution(const std::filesystem::path& path) {
    const std::string buf = read_all(path);
    if (is_json_path(path)) {
        nlohmann::json h;
        try {
            h = nlohmann::json::parse(buf);
        } catch (const nlohmann::json::parse_error& e) {
            throw IoError(std::string("JSON parse error: ") + e.what(), static_cast<std::int64_t>(e.byte) - 1);
        }
        return guarded(
            [&] {
                std::map<std::string, std::vector<double>> arrays;
                for (const auto& [name, values] : h.at("data").items()) arrays[name] = values.get<std::vector<double>>();
                return assemble(h, arrays);
            },
            0);
    }
    const std::int64_t size = static_cast<std::int64_t>(buf.size());
    if (buf.size() < 8 || std::memcmp(buf.data(), kMagic, 8) != 0)
        throw IoError("not a wavekit solution file (bad magic)", 0);
    if (buf.size() < 16) throw IoError("truncated before header length", size);
    const std::uint64_t hlen = get_u64(buf, 8);
    if (hlen > buf.size() - 16) throw IoError("header length " + std::to_string(hlen) + " exceeds file size", 8);
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(buf.substr(16, hlen));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("header parse error: ") + e.what(), kHeaderStart + static_cast<std::int64_t>(e.byte) - 1);
    }
    return guarded(
        [&] {
            std::map<std::string, std::vector<double>> arrays;
            std::size_t at = 16 + hlen;
            for (const auto& a : h.at("arrays")) {
                const std::string name = a.at("name").get<std::string>();
                const std::size_t count = a.at("count").get<std::size_t>();
                if (count > (buf.size() - at) / 8)
                    throw IoError("array '" + name + "' truncated: needs " + std::to_string(count * 8) + " bytes from offset " +
                                      std::to_string(at) + ", file ends",
                                  size);
                std::vector<double> v(count);
                for (std::size_t k = 0; k < count; ++k) v[k] = std::bit_cast<double>(get_u64(buf, at + 8 * k));
                at += 8 * count;
                arrays[name] = std::move(v);
            }
            if (at != buf.size()) throw IoError("unexpected trailing bytes after the last array", static_cast<std::int64_t>(at));
            return assemble(h, arrays);
        },
        kHeaderStart);
}

}  // namespace wavekit
