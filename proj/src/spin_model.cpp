#include "dnpsim/spin_model.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dnpsim/errors.hpp"

namespace dnp {

namespace {

using nlohmann::json;

constexpr std::array<TableRow, 27> kTable{{
    {"C0", 213.153, 3, 2.04},    {"C1", -36.308, 26.62, 2.83}, {"C2", 20.569, 41.51, 2.65},
    {"C3", -11.346, 59.21, 2.75}, {"C4", 8.029, 21.0, 2.69},    {"C5", 24.399, 24.81, 2.64},
    {"C6", -48.58, 9.0, 2.86},   {"C7", 14.58, 10, 2.67},      {"C8", 7.683, 4, 2.69},
    {"C9", -20.72, 12, 2.78},    {"C10", -23.22, 13, 2.78},    {"C11", -13.961, 9, 2.75},
    {"C12", -31.25, 8, 2.81},    {"C13", -14.07, 13, 2.76},    {"C15", -5.62, 5, 2.73},
    {"C16", -19.815, 5.3, 2.77}, {"C17", -4.66, 7, 2.73},      {"C18", 17.643, 8.6, 2.66},
    {"C20", -8.32, 3, 2.74},     {"C21", -9.79, 5.0, 2.74},    {"C22", 1.212, 13, 2.71},
    {"C23", 2.69, 11, 2.70},     {"C24", -3.177, 2, 2.72},     {"C25", -4.039, 0.5, 2.72},
    {"C26", -4.225, 0.771, 2.72}, {"C27", -3.873, 1.247, 2.72}, {"C28", -3.618, 9.472, 2.72},
}};

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    std::size_t line = 1;
    for (std::size_t i = 0; i < offset; ++i)
        if (text[i] == '\n') ++line;
    return line;
}

double require_number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ValidationError(where + "." + key, "missing required field");
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ValidationError(where + "." + key, "expected a number, got " + std::string(v.type_name()));
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(where + "." + key, "not finite");
    return x;
}

}  // namespace

std::size_t SpinRegister::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < nuclei.size(); ++i)
        if (nuclei[i].label == label) return i;
    throw ValidationError("label", "no nucleus named '" + std::string(label) + "' in register");
}

SpinRegister SpinRegister::subset(const std::vector<std::string>& labels) const {
    SpinRegister out{larmor, {}, b_field_gauss};
    for (const auto& l : labels) out.nuclei.push_back(nuclei[index_of(l)]);
    return out;
}

void SpinRegister::validate() const {
    if (!(larmor > 0.0) || !std::isfinite(larmor)) throw ValidationError("larmor", "must be a positive finite frequency");
    if (nuclei.size() > kMaxNuclei) {
        throw DimensionOverflow("nuclei", std::to_string(nuclei.size()) + " nuclei exceed the limit of " +
                                              std::to_string(kMaxNuclei) + " (joint dimension 256)");
    }
    std::set<std::string> seen;
    for (std::size_t i = 0; i < nuclei.size(); ++i) {
        const auto& n = nuclei[i];
        const std::string where = "nuclei[" + std::to_string(i) + "]";
        if (n.label.empty()) throw ValidationError(where + ".label", "empty label");
        if (!seen.insert(n.label).second) throw ValidationError(where + ".label", "duplicate label '" + n.label + "'");
        if (!std::isfinite(n.a_parallel) || !std::isfinite(n.a_perp))
            throw ValidationError(where, "non-finite coupling");
        if (n.a_perp < 0.0) throw ValidationError(where + ".a_perp", "must be >= 0");
        if (std::abs(n.a_parallel) >= larmor || n.a_perp >= larmor)
            throw ValidationError(where, "coupling of '" + n.label + "' is not weak compared with the Larmor frequency");
    }
}

std::string_view to_string(Coupling c) { return c == Coupling::Projector ? "projector" : "symmetric"; }

Coupling coupling_from_string(std::string_view name) {
    if (name == "projector") return Coupling::Projector;
    if (name == "symmetric") return Coupling::Symmetric;
    throw ValidationError("coupling", "unknown coupling '" + std::string(name) + "' (projector|symmetric)");
}

ComplexMatrix spin_half(char axis) {
    const Complex i(0.0, 1.0);
    switch (axis) {
        case 'x': return {{0.0, 0.5}, {0.5, 0.0}};
        case 'y': return {{0.0, -0.5 * i}, {0.5 * i, 0.0}};
        case 'z': return {{0.5, 0.0}, {0.0, -0.5}};
        case '+': return {{0.0, 1.0}, {0.0, 0.0}};
        case '-': return {{0.0, 0.0}, {1.0, 0.0}};
        default: throw ValidationError("axis", std::string("unknown spin axis '") + axis + "'");
    }
}

ComplexMatrix embed_sites(const std::vector<ComplexMatrix>& ops) {
    ComplexMatrix out = ComplexMatrix::identity(1);
    const ComplexMatrix id2 = ComplexMatrix::identity(2);
    for (const auto& op : ops) {
        const ComplexMatrix& site = op.empty() ? id2 : op;
        ComplexMatrix next(out.rows() * 2, out.cols() * 2);
        for (std::size_t r = 0; r < out.rows(); ++r)
            for (std::size_t c = 0; c < out.cols(); ++c)
                for (std::size_t a = 0; a < 2; ++a)
                    for (std::size_t b = 0; b < 2; ++b) next(2 * r + a, 2 * c + b) = out(r, c) * site(a, b);
        out = std::move(next);
    }
    return out;
}

SpinOperatorSet build_operators(const SpinRegister& reg) {
    if (reg.size() > kMaxNuclei) {
        throw DimensionOverflow("nuclei", std::to_string(reg.size()) + " nuclei exceed the limit of " +
                                              std::to_string(kMaxNuclei));
    }
    const std::size_t sites = reg.size() + 1;
    auto at = [&](std::size_t site, char axis) {
        std::vector<ComplexMatrix> ops(sites);
        ops[site] = spin_half(axis);
        return embed_sites(ops);
    };
    SpinOperatorSet out;
    out.n_nuclei = reg.size();
    out.sz = at(0, 'z');
    out.sx = at(0, 'x');
    out.sy = at(0, 'y');
    out.sp = at(0, '+');
    out.sm = at(0, '-');
    for (std::size_t n = 1; n < sites; ++n) {
        out.iz.push_back(at(n, 'z'));
        out.ix.push_back(at(n, 'x'));
        out.iy.push_back(at(n, 'y'));
        out.ip.push_back(at(n, '+'));
        out.im.push_back(at(n, '-'));
    }
    return out;
}

ComplexMatrix static_hamiltonian(const SpinRegister& reg, const SpinOperatorSet& ops, Coupling coupling) {
    const std::size_t dim = reg.dimension();
    if (ops.dimension() != dim) throw DimensionMismatch("static_hamiltonian: operator set does not match register");
    ComplexMatrix h(dim, dim);
    const std::size_t sites = reg.size() + 1;
    const ComplexMatrix sz = spin_half('z');
    for (std::size_t n = 0; n < reg.size(); ++n) {
        const auto& nuc = reg.nuclei[n];
        if (coupling == Coupling::Projector) {
            h += (reg.larmor - 0.5 * nuc.a_parallel) * ops.iz[n];
            h -= (0.5 * nuc.a_perp) * ops.ix[n];
        } else {
            h += reg.larmor * ops.iz[n];
        }
        std::vector<ComplexMatrix> zz(sites), zx(sites);
        zz[0] = sz;
        zz[n + 1] = sz;
        zx[0] = sz;
        zx[n + 1] = spin_half('x');
        h += nuc.a_parallel * embed_sites(zz);
        h += nuc.a_perp * embed_sites(zx);
    }
    return h;
}

ComplexMatrix static_hamiltonian(const SpinRegister& reg, Coupling coupling) {
    return static_hamiltonian(reg, build_operators(reg), coupling);
}

ComplexMatrix nuclear_block(const ComplexMatrix& joint, std::size_t electron_state) {
    if (!joint.is_square() || joint.rows() % 2 != 0) throw DimensionMismatch("nuclear_block: bad joint dimension");
    if (electron_state > 1) throw ValidationError("electron_state", "must be 0 or 1");
    const std::size_t d = joint.rows() / 2;
    const std::size_t off = electron_state * d;
    ComplexMatrix out(d, d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) out(r, c) = joint(off + r, off + c);
    return out;
}

double precession_frequency(const NuclearSpin& nucleus, double larmor) {
    if (!(larmor > 0.0)) throw ValidationError("larmor", "must be positive");
    return std::hypot(larmor - 0.5 * nucleus.a_parallel, 0.5 * nucleus.a_perp);
}

SpinRegister load_register(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::string msg = e.what();
        if (auto pos = msg.find("parse error"); pos != std::string::npos) msg = msg.substr(pos);
        throw ParseError(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), msg);
    }
    if (!doc.is_object()) throw ValidationError("", "register config must be a JSON object");

    SpinRegister reg;
    if (doc.contains("b_field_gauss") && !doc.at("b_field_gauss").is_null()) {
        const double b = require_number(doc, "b_field_gauss", "config");
        if (!(b > 0.0)) throw ValidationError("config.b_field_gauss", "must be positive");
        reg.b_field_gauss = b;
        reg.larmor = larmor_from_field(b);
    }
    if (doc.contains("larmor_rad_per_us") && !doc.at("larmor_rad_per_us").is_null()) {
        reg.larmor = require_number(doc, "larmor_rad_per_us", "config");
        if (!(reg.larmor > 0.0)) throw ValidationError("config.larmor_rad_per_us", "must be positive");
    }
    if (!doc.contains("nuclei")) throw ValidationError("config.nuclei", "missing required field");
    const auto& list = doc.at("nuclei");
    if (!list.is_array()) throw ValidationError("config.nuclei", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& item = list[i];
        const std::string where = "nuclei[" + std::to_string(i) + "]";
        if (!item.is_object()) throw ValidationError(where, "expected an object");
        if (!item.contains("label") || !item.at("label").is_string())
            throw ValidationError(where + ".label", "missing or not a string");
        NuclearSpin n;
        n.label = item.at("label").get<std::string>();
        n.a_parallel = khz_to_rad_per_us(require_number(item, "a_parallel_khz", where));
        n.a_perp = khz_to_rad_per_us(require_number(item, "a_perp_khz", where));
        reg.nuclei.push_back(std::move(n));
    }
    reg.validate();
    return reg;
}

SpinRegister load_register_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", "cannot open register file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_register(buf.str());
}

std::string register_to_json(const SpinRegister& reg) {
    json doc;
    doc["larmor_rad_per_us"] = reg.larmor;
    if (reg.b_field_gauss) doc["b_field_gauss"] = *reg.b_field_gauss;
    doc["nuclei"] = json::array();
    for (const auto& n : reg.nuclei) {
        doc["nuclei"].push_back({{"label", n.label},
                                 {"a_parallel_khz", rad_per_us_to_khz(n.a_parallel)},
                                 {"a_perp_khz", rad_per_us_to_khz(n.a_perp)}});
    }
    return doc.dump(2);
}

std::span<const TableRow> reference_table() { return kTable; }

NuclearSpin reference_spin(std::string_view label) {
    for (const auto& row : kTable)
        if (label == row.label)
            return {row.label, khz_to_rad_per_us(row.a_parallel_khz), khz_to_rad_per_us(row.a_perp_khz)};
    throw ValidationError("label", "'" + std::string(label) + "' is not in the reference table");
}

SpinRegister reference_register(const std::vector<std::string>& labels, double larmor) {
    SpinRegister reg;
    reg.larmor = larmor;
    for (const auto& l : labels) reg.nuclei.push_back(reference_spin(l));
    reg.validate();
    return reg;
}

}  // namespace dnp
