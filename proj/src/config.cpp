#include "ybspin/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ybspin {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw std::runtime_error(origin + ": " + what);
}

void require_keys(const json& obj, const std::string& origin, const std::string& section,
                  const std::set<std::string>& required, const std::set<std::string>& optional = {}) {
    if (!obj.is_object()) fail(origin, "section '" + section + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!required.count(key) && !optional.count(key)) {
            fail(origin, "unknown key '" + section + "." + key + "'");
        }
    }
    for (const auto& key : required) {
        if (!obj.contains(key)) fail(origin, "missing key '" + section + "." + key + "'");
    }
}

double number_at(const json& obj, const std::string& origin, const std::string& path) {
    const json& v = obj;
    if (!v.is_number()) fail(origin, "'" + path + "' must be a number");
    return v.get<double>();
}

AxialTensor tensor_from(const json& obj, const std::string& origin, const std::string& base,
                        const std::string& par_key, const std::string& perp_key) {
    return {number_at(obj.at(par_key), origin, base + "." + par_key),
            number_at(obj.at(perp_key), origin, base + "." + perp_key)};
}

ManifoldParams manifold_from(const json& obj, const std::string& origin, const std::string& section,
                             Manifold which) {
    require_keys(obj, origin, section,
                 {"g_parallel", "g_perpendicular", "a_parallel_ghz", "a_perpendicular_ghz", "g_n"},
                 {"optical_offset_ghz"});
    ManifoldParams p;
    p.g = tensor_from(obj, origin, section, "g_parallel", "g_perpendicular");
    p.a = tensor_from(obj, origin, section, "a_parallel_ghz", "a_perpendicular_ghz");
    p.gn = number_at(obj.at("g_n"), origin, section + ".g_n");
    if (obj.contains("optical_offset_ghz")) {
        p.optical_offset_ghz = number_at(obj.at("optical_offset_ghz"), origin, section + ".optical_offset_ghz");
    }
    p.label = which;
    p.validate();
    return p;
}

std::pair<int, int> pair_from(const json& arr, const std::string& origin, const std::string& path) {
    if (!arr.is_array() || arr.size() != 2 || !arr[0].is_number_integer() || !arr[1].is_number_integer()) {
        fail(origin, "'" + path + "' entries must be [ground_level, excited_level] pairs");
    }
    const int g = arr[0].get<int>();
    const int e = arr[1].get<int>();
    if (g < 1 || g > 4 || e < 1 || e > 4) fail(origin, "'" + path + "' levels must be in 1..4");
    return {g, e};
}

} // namespace

const AdjacencyEntry& RunConfig::adjacency_for(const std::string& letter) const {
    for (const auto& entry : adjacency) {
        if (entry.letter == letter) return entry;
    }
    throw std::invalid_argument("no adjacency entry for line '" + letter + "'");
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& err) {
        // Map the byte offset to a line number for a usable diagnostic.
        std::size_t line = 1;
        for (std::size_t i = 0; i < err.byte && i < text.size(); ++i) {
            if (text[i] == '\n') ++line;
        }
        fail(origin, "parse error at line " + std::to_string(line) + ": " + err.what());
    }

    require_keys(root, origin, "config",
                 {"constants", "ground", "excited", "medium", "sample", "moments", "lineshape",
                  "adjacency"},
                 {"isotope_moment_ratio", "nuclear_zeeman"});

    RunConfig cfg;

    const json& consts = root.at("constants");
    require_keys(consts, origin, "constants",
                 {"bohr_magneton_ghz_per_t", "nuclear_magneton_ghz_per_t", "boltzmann_ghz_per_k"});
    cfg.constants.bohr_magneton_ghz_per_t =
        number_at(consts.at("bohr_magneton_ghz_per_t"), origin, "constants.bohr_magneton_ghz_per_t");
    cfg.constants.nuclear_magneton_ghz_per_t = number_at(
        consts.at("nuclear_magneton_ghz_per_t"), origin, "constants.nuclear_magneton_ghz_per_t");
    cfg.constants.boltzmann_ghz_per_k =
        number_at(consts.at("boltzmann_ghz_per_k"), origin, "constants.boltzmann_ghz_per_k");
    cfg.constants.validate();

    cfg.ground = manifold_from(root.at("ground"), origin, "ground", Manifold::ground);
    cfg.excited = manifold_from(root.at("excited"), origin, "excited", Manifold::excited);

    const json& medium = root.at("medium");
    require_keys(medium, origin, "medium", {"n_parallel", "n_perpendicular", "wavelength0_m"});
    cfg.medium.n_parallel = number_at(medium.at("n_parallel"), origin, "medium.n_parallel");
    cfg.medium.n_perpendicular =
        number_at(medium.at("n_perpendicular"), origin, "medium.n_perpendicular");
    cfg.medium.wavelength0_m = number_at(medium.at("wavelength0_m"), origin, "medium.wavelength0_m");
    cfg.medium.validate();

    const json& sample = root.at("sample");
    require_keys(sample, origin, "sample", {"number_density_per_cm3", "temperature_k"});
    cfg.number_density_per_cm3 =
        number_at(sample.at("number_density_per_cm3"), origin, "sample.number_density_per_cm3");
    cfg.temperature_k = number_at(sample.at("temperature_k"), origin, "sample.temperature_k");
    if (!(cfg.number_density_per_cm3 > 0.0)) fail(origin, "sample.number_density_per_cm3 must be positive");
    if (!(cfg.temperature_k > 0.0)) fail(origin, "sample.temperature_k must be positive");

    const json& moments = root.at("moments");
    require_keys(moments, origin, "moments", {"pi_amplitude", "sigma_amplitude"});
    cfg.pi_moment_amplitude = number_at(moments.at("pi_amplitude"), origin, "moments.pi_amplitude");
    cfg.sigma_moment_amplitude =
        number_at(moments.at("sigma_amplitude"), origin, "moments.sigma_amplitude");

    const json& shape = root.at("lineshape");
    require_keys(shape, origin, "lineshape", {"kind", "fwhm_ghz"}, {"per_line_fwhm_ghz"});
    const std::string kind = shape.at("kind").get<std::string>();
    if (kind == "gaussian") {
        cfg.lineshape.kind = LineshapeKind::gaussian;
    } else if (kind == "lorentzian") {
        cfg.lineshape.kind = LineshapeKind::lorentzian;
    } else {
        fail(origin, "lineshape.kind must be 'gaussian' or 'lorentzian'");
    }
    cfg.lineshape.fwhm_ghz = number_at(shape.at("fwhm_ghz"), origin, "lineshape.fwhm_ghz");
    if (shape.contains("per_line_fwhm_ghz")) {
        for (const auto& [letter, w] : shape.at("per_line_fwhm_ghz").items()) {
            cfg.lineshape.per_line_fwhm_ghz[letter] =
                number_at(w, origin, "lineshape.per_line_fwhm_ghz." + letter);
        }
    }
    cfg.lineshape.validate();

    const json& adjacency = root.at("adjacency");
    if (!adjacency.is_object() || adjacency.empty()) {
        fail(origin, "adjacency must map line letters to entries");
    }
    for (const auto& [letter, entry] : adjacency.items()) {
        require_keys(entry, origin, "adjacency." + letter, {"pol", "pairs"});
        AdjacencyEntry out;
        out.letter = letter;
        const std::string pol = entry.at("pol").get<std::string>();
        if (pol == "forbidden") {
            out.forbidden = true;
        } else {
            out.pol = polarization_from_string(pol);
        }
        for (std::size_t i = 0; i < entry.at("pairs").size(); ++i) {
            out.pairs.push_back(
                pair_from(entry.at("pairs")[i], origin, "adjacency." + letter + ".pairs"));
        }
        if (out.pairs.empty()) fail(origin, "adjacency." + letter + " has no level pairs");
        cfg.adjacency.push_back(std::move(out));
    }

    if (root.contains("isotope_moment_ratio")) {
        cfg.isotope_moment_ratio =
            number_at(root.at("isotope_moment_ratio"), origin, "isotope_moment_ratio");
        if (*cfg.isotope_moment_ratio == 0.0) fail(origin, "isotope_moment_ratio must be nonzero");
    }
    if (root.contains("nuclear_zeeman")) {
        const std::string mode = root.at("nuclear_zeeman").get<std::string>();
        if (mode == "folded") {
            cfg.nuclear_zeeman = NuclearZeeman::folded;
        } else if (mode == "explicit") {
            cfg.nuclear_zeeman = NuclearZeeman::explicit_term;
        } else {
            fail(origin, "nuclear_zeeman must be 'folded' or 'explicit'");
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

} // namespace ybspin
