#include "ssc/config.hpp"

#include "ssc/builtin_models.hpp"

#include <toml.hpp>

#include <fstream>
#include <sstream>

namespace ssc {

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorCode::kConfig, message); }

double as_number(const toml::node& node, const std::string& what) {
    if (auto v = node.value<double>()) return *v;
    fail(what + ": expected a number");
}

std::vector<double> flat_numbers(const toml::node& node, const std::string& what) {
    std::vector<double> out;
    if (const auto* arr = node.as_array()) {
        for (const auto& item : *arr) {
            if (item.is_array()) {
                auto inner = flat_numbers(item, what);
                out.insert(out.end(), inner.begin(), inner.end());
            } else {
                out.push_back(as_number(item, what));
            }
        }
        return out;
    }
    out.push_back(as_number(node, what));
    return out;
}

// Per-regime blocks: either a list of m arrays, or (m = 1) a single flat array.
std::vector<std::vector<double>> regime_blocks(const toml::table& sec, std::string_view key,
                                               int m, std::size_t per_block,
                                               const std::string& what) {
    const toml::node* node = sec.get(key);
    if (!node) fail(what + ": missing '" + std::string(key) + "'");
    const auto* arr = node->as_array();
    std::vector<std::vector<double>> out;
    const bool nested = arr && static_cast<int>(arr->size()) == m && arr->front().is_array();
    if (nested) {
        for (const auto& item : *arr) out.push_back(flat_numbers(item, what));
    } else {
        const auto all = flat_numbers(*node, what);
        if (all.size() != per_block * static_cast<std::size_t>(m))
            fail(what + ": '" + std::string(key) + "' has " + std::to_string(all.size()) +
                 " numbers, expected " + std::to_string(per_block * m));
        for (int a = 0; a < m; ++a)
            out.emplace_back(all.begin() + static_cast<long>(a * per_block),
                             all.begin() + static_cast<long>((a + 1) * per_block));
    }
    for (const auto& b : out)
        if (b.size() != per_block)
            fail(what + ": each regime block of '" + std::string(key) + "' needs " +
                 std::to_string(per_block) + " numbers");
    return out;
}

CoefficientField parse_field(const toml::table& sec, int rows, int cols, int n, int m,
                             const std::string& what) {
    const auto family_name = sec["family"].value<std::string>();
    if (!family_name) fail(what + ": missing 'family'");
    const auto entries = static_cast<std::size_t>(rows * cols);
    switch (family_from_string(*family_name)) {
        case CoefficientField::Family::kConstant:
            return CoefficientField::constant(rows, cols, n, regime_blocks(sec, "value", m, entries, what));
        case CoefficientField::Family::kAffine:
            return CoefficientField::affine(rows, cols, n,
                                            regime_blocks(sec, "A", m, entries * n, what),
                                            regime_blocks(sec, "c", m, entries, what));
        case CoefficientField::Family::kGeometric:
            return CoefficientField::geometric(rows, cols, regime_blocks(sec, "coef", m, entries, what));
        case CoefficientField::Family::kSqrtPower:
            return CoefficientField::sqrt_power(rows, cols, regime_blocks(sec, "coef", m, entries, what));
        case CoefficientField::Family::kTable: {
            CoefficientField::TableAxes axes;
            if (!sec.get("upper") || !sec.get("nodes")) fail(what + ": TABLE needs 'upper' and 'nodes'");
            axes.upper = flat_numbers(*sec.get("upper"), what);
            for (double v : flat_numbers(*sec.get("nodes"), what)) axes.nodes.push_back(static_cast<int>(v));
            std::size_t count = 1;
            for (int k : axes.nodes) count *= static_cast<std::size_t>(std::max(k, 0));
            return CoefficientField::table(rows, cols, axes,
                                           regime_blocks(sec, "values", m, count * entries, what));
        }
    }
    fail(what + ": unsupported family");
}

const toml::table* section(const toml::table& root, std::string_view name) {
    const toml::node* node = root.get(name);
    if (!node) return nullptr;
    if (!node->is_table()) fail("[" + std::string(name) + "] must be a table");
    return node->as_table();
}

template <class T>
std::optional<T> get(const toml::table* sec, std::string_view key) {
    if (!sec) return std::nullopt;
    const toml::node* node = sec->get(key);
    if (!node) return std::nullopt;
    if (auto v = node->value<T>()) return v;
    fail("'" + std::string(key) + "' has the wrong type");
}

ModelSpec from_builtin(const toml::table& sec) {
    const auto name = sec["name"].value<std::string>();
    if (!name) fail("[builtin] needs 'name'");
    if (*name != "example3") {
        for (auto&& [k, v] : sec)
            if (k.str() != "name") fail("[builtin] " + *name + " takes no parameter '" + std::string(k.str()) + "'");
        return builtin_model(*name);
    }
    Example3Params p;
    for (auto&& [k, v] : sec) {
        const std::string key(k.str());
        if (key == "name") continue;
        const double value = as_number(v, "[builtin] " + key);
        if (key == "mu1") p.mu1 = value;
        else if (key == "mu2") p.mu2 = value;
        else if (key == "r") p.r = value;
        else if (key == "lambda1") p.lambda1 = value;
        else if (key == "lambda2") p.lambda2 = value;
        else if (key == "sigma1") p.sigma1 = value;
        else if (key == "sigma2") p.sigma2 = value;
        else fail("[builtin] example3 has no parameter '" + key + "'");
    }
    return example3(p);
}

}  // namespace

LoadedConfig parse_config(std::string_view text, std::string_view origin) {
    toml::table root;
    try {
        root = toml::parse(text, origin);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << origin << ": " << e.description() << " (line " << e.source().begin.line << ")";
        fail(msg.str());
    }
    for (auto&& [k, v] : root) {
        static const char* known[] = {"builtin", "model", "drift", "diffusion", "reward",
                                      "generator", "grid", "solver", "simulation"};
        if (std::find(std::begin(known), std::end(known), k.str()) == std::end(known))
            fail("unknown section [" + std::string(k.str()) + "]");
    }

    const toml::table* builtin = section(root, "builtin");
    const toml::table* model_sec = section(root, "model");
    std::optional<ModelSpec> base;
    std::optional<std::string> builtin_name;
    if (builtin) {
        base = from_builtin(*builtin);
        builtin_name = base->name();
    }

    const int n = get<int64_t>(model_sec, "n").has_value() ? static_cast<int>(*get<int64_t>(model_sec, "n"))
                  : base ? base->dim() : 0;
    const int m = get<int64_t>(model_sec, "m").has_value() ? static_cast<int>(*get<int64_t>(model_sec, "m"))
                  : base ? base->regimes() : 1;
    if (n < 1) fail("[model] n must be a positive integer");
    if (m < 1) fail("[model] m must be a positive integer");
    const int d = get<int64_t>(model_sec, "d").has_value() ? static_cast<int>(*get<int64_t>(model_sec, "d"))
                  : base ? base->noise_dim() : n;
    if (d < 1) fail("[model] d must be a positive integer");
    if (base && (n != base->dim() || m != base->regimes()))
        fail("[model] n/m disagree with the builtin model");

    auto field = [&](std::string_view name, int cols, const CoefficientField* fallback) {
        if (const toml::table* sec = section(root, name))
            return parse_field(*sec, n, cols, n, m, "[" + std::string(name) + "]");
        if (!fallback) fail("missing section [" + std::string(name) + "]");
        return *fallback;
    };
    const CoefficientField drift = field("drift", 1, base ? &base->drift() : nullptr);
    const CoefficientField diffusion = field("diffusion", d, base ? &base->diffusion() : nullptr);
    const CoefficientField reward = field("reward", 1, base ? &base->reward() : nullptr);

    Eigen::MatrixXd q;
    if (const toml::table* gen = section(root, "generator")) {
        if (!gen->get("matrix")) fail("[generator] needs 'matrix'");
        const auto flat = flat_numbers(*gen->get("matrix"), "[generator] matrix");
        if (flat.size() != static_cast<std::size_t>(m * m))
            fail("[generator] matrix needs " + std::to_string(m * m) + " entries");
        q.resize(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) q(i, j) = flat[static_cast<std::size_t>(i * m + j)];
    } else if (base) {
        q = base->generator();
    } else if (m == 1) {
        q = Eigen::MatrixXd::Zero(1, 1);
    } else {
        fail("missing section [generator]");
    }

    double r = base ? base->discount() : 0.0;
    if (auto v = get<double>(model_sec, "r")) r = *v;
    if (!base && !get<double>(model_sec, "r")) fail("[model] needs 'r'");
    std::optional<double> kappa0 = base ? base->kappa0() : std::nullopt;
    if (auto v = get<double>(model_sec, "kappa0")) kappa0 = *v;
    std::string name = base ? base->name() : "custom";
    if (auto v = get<std::string>(model_sec, "name")) name = *v;

    LoadedConfig out{ModelSpec(name, r, drift, diffusion, reward, q, kappa0), builtin_name, {}};
    auto& s = out.settings;
    const toml::table* grid = section(root, "grid");
    if (grid && grid->get("upper")) s.grid_upper = flat_numbers(*grid->get("upper"), "[grid] upper");
    if (grid && grid->get("nodes")) {
        std::vector<int> nodes;
        for (double v : flat_numbers(*grid->get("nodes"), "[grid] nodes")) nodes.push_back(static_cast<int>(v));
        s.grid_nodes = nodes;
    }
    const toml::table* solver = section(root, "solver");
    s.tolerance = get<double>(solver, "tolerance");
    if (auto v = get<int64_t>(solver, "max_iterations")) s.max_iterations = static_cast<int>(*v);
    s.outer = get<std::string>(solver, "outer");
    const toml::table* sim = section(root, "simulation");
    s.dt = get<double>(sim, "dt");
    s.horizon = get<double>(sim, "horizon");
    if (auto v = get<int64_t>(sim, "paths")) s.paths = *v;
    if (auto v = get<int64_t>(sim, "seed")) s.seed = static_cast<std::uint64_t>(*v);
    if (sim && sim->get("x0")) s.x0 = flat_numbers(*sim->get("x0"), "[simulation] x0");
    if (auto v = get<int64_t>(sim, "alpha0")) s.alpha0 = static_cast<int>(*v);
    return out;
}

LoadedConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open model file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

}  // namespace ssc
