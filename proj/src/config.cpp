#include "driftnet/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace driftnet {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string join_issues(const std::vector<std::string>& problems) {
    std::string msg = "invalid config";
    if (problems.size() > 1) msg += " (" + std::to_string(problems.size()) + " problems)";
    for (const auto& p : problems) msg += "\n  - " + p;
    return msg;
}

// optimal string alignment distance (edits + adjacent transposition)
int osa_distance(const std::string& a, const std::string& b) {
    const int m = static_cast<int>(a.size()), n = static_cast<int>(b.size());
    std::vector<std::vector<int>> d(m + 1, std::vector<int>(n + 1, 0));
    for (int i = 0; i <= m; ++i) d[i][0] = i;
    for (int j = 0; j <= n; ++j) d[0][j] = j;
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= n; ++j) {
            const int cost = a[i - 1] == b[j - 1] ? 0 : 1;
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
            if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
                d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
        }
    return d[m][n];
}

struct Ctx {
    std::vector<std::string> issues;

    void complain(const std::string& where, const std::string& what) {
        issues.push_back(where.empty() ? what : where + ": " + what);
    }

    void check_keys(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
        for (const auto& item : j.items()) {
            const std::string& key = item.key();
            bool known = false;
            for (const char* a : allowed)
                if (key == a) {
                    known = true;
                    break;
                }
            if (known) continue;
            std::string best;
            int best_d = 3;
            for (const char* a : allowed) {
                const int dist = osa_distance(key, a);
                if (dist < best_d) {
                    best_d = dist;
                    best = a;
                }
            }
            std::string msg = "unknown key '" + key + "'";
            if (!best.empty()) msg += " (did you mean '" + best + "'?)";
            complain(where, msg);
        }
    }

    bool get_str(const json& j, const std::string& where, const char* key, std::string& out) {
        if (!j.contains(key)) return false;
        if (!j[key].is_string()) {
            complain(where + "." + key, "expected a string");
            return false;
        }
        out = j[key].get<std::string>();
        return true;
    }

    template <typename T>
    bool get_int(const json& j, const std::string& where, const char* key, T& out) {
        if (!j.contains(key)) return false;
        if (!j[key].is_number_integer() && !j[key].is_number_unsigned()) {
            complain(where + "." + key, "expected an integer");
            return false;
        }
        out = j[key].get<T>();
        return true;
    }

    bool get_num(const json& j, const std::string& where, const char* key, double& out) {
        if (!j.contains(key)) return false;
        if (!j[key].is_number()) {
            complain(where + "." + key, "expected a number");
            return false;
        }
        out = j[key].get<double>();
        return true;
    }

    bool get_num_array(const json& j, const std::string& where, const char* key,
                       std::vector<double>& out) {
        if (!j.contains(key)) return false;
        if (!j[key].is_array()) {
            complain(where + "." + key, "expected an array of numbers");
            return false;
        }
        std::vector<double> vals;
        for (const auto& v : j[key]) {
            if (!v.is_number()) {
                complain(where + "." + key, "expected an array of numbers");
                return false;
            }
            vals.push_back(v.get<double>());
        }
        out = std::move(vals);
        return true;
    }

    bool get_int_array(const json& j, const std::string& where, const char* key,
                       std::vector<int>& out) {
        if (!j.contains(key)) return false;
        if (!j[key].is_array()) {
            complain(where + "." + key, "expected an array of integers");
            return false;
        }
        std::vector<int> vals;
        for (const auto& v : j[key]) {
            if (!v.is_number_integer() && !v.is_number_unsigned()) {
                complain(where + "." + key, "expected an array of integers");
                return false;
            }
            vals.push_back(v.get<int>());
        }
        out = std::move(vals);
        return true;
    }
};

ClassParams default_smoothness() {
    ClassParams cls;
    cls.q = 0;
    cls.dims = {1, 1};
    cls.active = {1};
    cls.smooth = {1.0};
    cls.holder_k = 1.0;
    return cls;
}

void parse_model(Ctx& ctx, const json& j, ModelConfig& m) {
    ctx.check_keys(j, "model", {"recipe", "dim", "coord", "radial_rate", "noise", "coeffs"});
    ctx.get_str(j, "model", "recipe", m.recipe);
    ctx.get_int(j, "model", "dim", m.dim);
    ctx.get_int(j, "model", "coord", m.coord);
    ctx.get_num(j, "model", "radial_rate", m.radial_rate);
    ctx.get_num(j, "model", "noise", m.noise);
    ctx.get_num_array(j, "model", "coeffs", m.coeffs);
}

void parse_smoothness(Ctx& ctx, const json& j, ClassParams& cls) {
    ctx.check_keys(j, "smoothness", {"q", "dims", "active", "smooth", "holder_k"});
    ctx.get_int(j, "smoothness", "q", cls.q);
    ctx.get_int_array(j, "smoothness", "dims", cls.dims);
    ctx.get_int_array(j, "smoothness", "active", cls.active);
    ctx.get_num_array(j, "smoothness", "smooth", cls.smooth);
    ctx.get_num(j, "smoothness", "holder_k", cls.holder_k);
}

void parse_train(Ctx& ctx, const json& j, TrainConfig& t) {
    ctx.check_keys(j, "train", {"steps", "step_size", "decay", "momentum", "batch", "restarts",
                                "projection_every", "seed"});
    ctx.get_int(j, "train", "steps", t.steps);
    ctx.get_num(j, "train", "step_size", t.step_size);
    ctx.get_num(j, "train", "decay", t.decay);
    ctx.get_num(j, "train", "momentum", t.momentum);
    ctx.get_int(j, "train", "batch", t.batch);
    ctx.get_int(j, "train", "restarts", t.restarts);
    ctx.get_int(j, "train", "projection_every", t.projection_every);
    ctx.get_int(j, "train", "seed", t.seed);
}

void parse_architecture(Ctx& ctx, const json& j, ArchitectureConfig& a) {
    ctx.check_keys(j, "architecture",
                   {"source", "sup_bound", "constants", "depth", "width", "sparsity"});
    ctx.get_str(j, "architecture", "source", a.source);
    ctx.get_num(j, "architecture", "sup_bound", a.sup_bound);
    if (j.contains("constants")) {
        const json& c = j["constants"];
        if (!c.is_object()) {
            ctx.complain("architecture.constants", "expected an object");
        } else {
            ctx.check_keys(c, "architecture.constants",
                           {"c_depth_upper", "c_width", "c_sparse_lower", "c_sparse_upper"});
            ctx.get_num(c, "architecture.constants", "c_depth_upper", a.constants.c_depth_upper);
            ctx.get_num(c, "architecture.constants", "c_width", a.constants.c_width);
            ctx.get_num(c, "architecture.constants", "c_sparse_lower", a.constants.c_sparse_lower);
            ctx.get_num(c, "architecture.constants", "c_sparse_upper", a.constants.c_sparse_upper);
        }
    }
    ctx.get_int(j, "architecture", "depth", a.depth);
    ctx.get_int(j, "architecture", "width", a.width);
    ctx.get_int(j, "architecture", "sparsity", a.sparsity);
}

void parse_eval(Ctx& ctx, const json& j, EvalConfig& e) {
    ctx.check_keys(j, "eval", {"copies", "substeps", "micro_step"});
    ctx.get_int(j, "eval", "copies", e.copies);
    ctx.get_int(j, "eval", "substeps", e.substeps);
    ctx.get_num(j, "eval", "micro_step", e.micro_step);
}

void parse_seeds(Ctx& ctx, const json& j, SeedsConfig& s) {
    ctx.check_keys(j, "seeds", {"base", "count"});
    ctx.get_int(j, "seeds", "base", s.base);
    ctx.get_int(j, "seeds", "count", s.count);
}

void validate_semantics(Ctx& ctx, ExperimentConfig& cfg) {
    const ModelConfig& m = cfg.model;
    const bool recipe_known = m.recipe == "additive" || m.recipe == "product-of-splines" ||
                              m.recipe == "single-layer-polynomial";
    if (!recipe_known)
        ctx.complain("model.recipe",
                     "unknown recipe '" + m.recipe +
                         "' (expected additive | product-of-splines | single-layer-polynomial)");
    if (m.dim < 1) ctx.complain("model.dim", "must be >= 1");
    if (m.coord < 1 || m.coord > m.dim)
        ctx.complain("model.coord", "must lie in [1, dim]");
    if (!(m.radial_rate > 0.0 && m.radial_rate <= 1.0))
        ctx.complain("model.radial_rate", "must lie in (0, 1]");
    if (!(m.noise >= 0.0)) ctx.complain("model.noise", "must be >= 0");
    for (double c : m.coeffs)
        if (!std::isfinite(c)) {
            ctx.complain("model.coeffs", "entries must be finite");
            break;
        }

    bool cls_ok = true;
    try {
        cfg.smoothness.validate();
    } catch (const std::exception& e) {
        cls_ok = false;
        ctx.complain("smoothness", e.what());
    }
    if (cls_ok) {
        if (cfg.smoothness.input_dim() != m.dim)
            ctx.complain("smoothness.dims", "dims[0] must equal model.dim");
        if (recipe_known) {
            if (m.recipe == "single-layer-polynomial" && cfg.smoothness.q != 0)
                ctx.complain("smoothness.q", "recipe single-layer-polynomial needs q == 0");
            if ((m.recipe == "additive" || m.recipe == "product-of-splines")) {
                if (cfg.smoothness.q != 1)
                    ctx.complain("smoothness.q", "recipe " + m.recipe + " needs q == 1");
                else if (cfg.smoothness.dims[1] != cfg.smoothness.dims[0] ||
                         cfg.smoothness.active[1] != cfg.smoothness.dims[1])
                    ctx.complain("smoothness",
                                 "recipe " + m.recipe +
                                     " needs dims[1] == dims[0] and active[1] == dims[1]");
            }
        }
    }

    if (cfg.grid.empty()) ctx.complain("grid", "required, give at least one {n, delta} cell");
    for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
        const GridCell& c = cfg.grid[k];
        const std::string where = "grid[" + std::to_string(k) + "]";
        if (c.n < 1) ctx.complain(where, "n must be >= 1");
        if (!(c.delta > 0.0 && c.delta <= 1.0 &&
              static_cast<double>(c.n) * c.delta >= 2.0))
            ctx.complain(where, "sampling constraint violated, need delta <= 1 and n*delta >= 2");
    }

    const TrainConfig& t = cfg.train;
    if (t.steps < 1) ctx.complain("train.steps", "must be >= 1");
    if (!(t.step_size > 0.0)) ctx.complain("train.step_size", "must be > 0");
    if (!(t.decay >= 0.0)) ctx.complain("train.decay", "must be >= 0");
    if (!(t.momentum >= 0.0 && t.momentum < 1.0))
        ctx.complain("train.momentum", "must lie in [0, 1)");
    if (t.batch < 0) ctx.complain("train.batch", "must be >= 0 (0 means full data)");
    if (t.restarts < 1) ctx.complain("train.restarts", "must be >= 1");
    if (t.projection_every < 1) ctx.complain("train.projection_every", "must be >= 1");

    const ArchitectureConfig& a = cfg.architecture;
    if (a.source != "auto" && a.source != "explicit")
        ctx.complain("architecture.source", "expected auto | explicit");
    if (a.sup_bound != 0.0 && !(a.sup_bound >= 1.0))
        ctx.complain("architecture.sup_bound", "must be >= 1 (or 0 for automatic)");
    if (a.source == "explicit") {
        if (a.depth < 1) ctx.complain("architecture.depth", "must be >= 1 when source is explicit");
        if (a.width < 1) ctx.complain("architecture.width", "must be >= 1 when source is explicit");
        if (a.sparsity < 2)
            ctx.complain("architecture.sparsity", "must be >= 2 when source is explicit");
    }
    if (!(a.constants.c_depth_upper > 0.0 && a.constants.c_width > 0.0 &&
          a.constants.c_sparse_lower > 0.0 && a.constants.c_sparse_upper > 0.0))
        ctx.complain("architecture.constants", "all constants must be > 0");
    if (a.constants.c_sparse_upper < a.constants.c_sparse_lower)
        ctx.complain("architecture.constants", "c_sparse_upper must be >= c_sparse_lower");

    if (cfg.eval.copies < 2) ctx.complain("eval.copies", "must be >= 2");
    if (cfg.eval.substeps < 0) ctx.complain("eval.substeps", "must be >= 0 (0 means automatic)");
    if (!(cfg.eval.micro_step > 0.0)) ctx.complain("eval.micro_step", "must be > 0");

    if (cfg.seeds.count < 1) ctx.complain("seeds.count", "must be >= 1");
    if (cfg.out_dir.empty()) ctx.complain("out_dir", "must not be empty");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_issues(problems)), issues(std::move(problems)) {}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("not valid JSON: ") + e.what()});
    }

    Ctx ctx;
    ExperimentConfig cfg;
    cfg.smoothness = default_smoothness();

    if (!j.is_object()) {
        throw ConfigError({"top level: expected an object"});
    }
    ctx.check_keys(j, "top level",
                   {"model", "smoothness", "grid", "train", "architecture", "eval", "seeds",
                    "out_dir"});

    auto section = [&](const char* key) -> const json* {
        if (!j.contains(key)) return nullptr;
        if (!j[key].is_object()) {
            ctx.complain(key, "expected an object");
            return nullptr;
        }
        return &j[key];
    };

    if (const json* s = section("model")) parse_model(ctx, *s, cfg.model);
    if (const json* s = section("smoothness")) parse_smoothness(ctx, *s, cfg.smoothness);
    if (j.contains("grid")) {
        if (!j["grid"].is_array()) {
            ctx.complain("grid", "expected an array of {n, delta} cells");
        } else {
            for (std::size_t k = 0; k < j["grid"].size(); ++k) {
                const json& c = j["grid"][k];
                const std::string where = "grid[" + std::to_string(k) + "]";
                if (!c.is_object()) {
                    ctx.complain(where, "expected an object");
                    continue;
                }
                ctx.check_keys(c, where, {"n", "delta"});
                GridCell cell;
                if (!ctx.get_int(c, where, "n", cell.n)) ctx.complain(where + ".n", "required");
                if (!ctx.get_num(c, where, "delta", cell.delta))
                    ctx.complain(where + ".delta", "required");
                cfg.grid.push_back(cell);
            }
        }
    }
    if (const json* s = section("train")) parse_train(ctx, *s, cfg.train);
    if (const json* s = section("architecture")) parse_architecture(ctx, *s, cfg.architecture);
    if (const json* s = section("eval")) parse_eval(ctx, *s, cfg.eval);
    if (const json* s = section("seeds")) parse_seeds(ctx, *s, cfg.seeds);
    ctx.get_str(j, "top level", "out_dir", cfg.out_dir);

    validate_semantics(ctx, cfg);
    if (!ctx.issues.empty()) throw ConfigError(std::move(ctx.issues));
    return cfg;
}

ExperimentConfig load_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError({"cannot open config file: " + file});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string canonical_text(const ExperimentConfig& cfg) {
    ordered_json j;
    j["model"] = {{"recipe", cfg.model.recipe},
                  {"dim", cfg.model.dim},
                  {"coord", cfg.model.coord},
                  {"radial_rate", cfg.model.radial_rate},
                  {"noise", cfg.model.noise},
                  {"coeffs", cfg.model.coeffs}};
    j["smoothness"] = {{"q", cfg.smoothness.q},
                       {"dims", cfg.smoothness.dims},
                       {"active", cfg.smoothness.active},
                       {"smooth", cfg.smoothness.smooth},
                       {"holder_k", cfg.smoothness.holder_k}};
    j["grid"] = ordered_json::array();
    for (const GridCell& c : cfg.grid)
        j["grid"].push_back(ordered_json{{"n", c.n}, {"delta", c.delta}});
    j["train"] = {{"steps", cfg.train.steps},
                  {"step_size", cfg.train.step_size},
                  {"decay", cfg.train.decay},
                  {"momentum", cfg.train.momentum},
                  {"batch", cfg.train.batch},
                  {"restarts", cfg.train.restarts},
                  {"projection_every", cfg.train.projection_every},
                  {"seed", cfg.train.seed}};
    j["architecture"] = {{"source", cfg.architecture.source},
                         {"sup_bound", cfg.architecture.sup_bound},
                         {"constants",
                          ordered_json{{"c_depth_upper", cfg.architecture.constants.c_depth_upper},
                                       {"c_width", cfg.architecture.constants.c_width},
                                       {"c_sparse_lower", cfg.architecture.constants.c_sparse_lower},
                                       {"c_sparse_upper",
                                        cfg.architecture.constants.c_sparse_upper}}},
                         {"depth", cfg.architecture.depth},
                         {"width", cfg.architecture.width},
                         {"sparsity", cfg.architecture.sparsity}};
    j["eval"] = {{"copies", cfg.eval.copies},
                 {"substeps", cfg.eval.substeps},
                 {"micro_step", cfg.eval.micro_step}};
    j["seeds"] = {{"base", cfg.seeds.base}, {"count", cfg.seeds.count}};
    j["out_dir"] = cfg.out_dir;
    return j.dump(2) + "\n";
}

int resolve_substeps(const EvalConfig& eval, double delta) {
    if (eval.substeps > 0) return eval.substeps;
    const int m = static_cast<int>(std::ceil(delta / eval.micro_step));
    return std::clamp(m, 1, 50);
}

}  // namespace driftnet
