#pragma once

// Run configuration: a key=value file plus overrides, and construction of the
// configured predictors.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "matchcast/data.hpp"
#include "matchcast/dirichlet.hpp"
#include "matchcast/evaluate.hpp"
#include "matchcast/optim.hpp"
#include "matchcast/poisson.hpp"

namespace matchcast {

struct RunConfig {
    std::string matches_path;
    std::vector<std::string> models{"trivial", "mn-dir1", "mn-dir2", "bt", "poisson-lee", "poisson-biv"};
    std::string output_dir = "out";
    std::uint64_t seed = 20170101;
    bool strict = false;

    OptimizerSettings bt;
    OptimizerSettings poisson_optimizer;
    double poisson_tail_tol = 1e-10;
    bool poisson_correlated = true;  // for the generic "poisson" model
    TrainingWindow poisson_window{TrainingWindow::All{}};
    GridSpec mn_dir2_grid = GridSpec::standard();
    int calibration_bins = 10;

    /// Every key=value pair in effect, in a fixed order, for the run record.
    std::vector<std::pair<std::string, std::string>> describe() const {
        const auto list = [](const std::vector<double>& v) {
            std::ostringstream os;
            os.precision(17);
            for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
            return os.str();
        };
        std::string models_s;
        for (std::size_t i = 0; i < models.size(); ++i) models_s += (i ? "," : "") + models[i];
        const auto num = [](double v) {
            std::ostringstream os;
            os.precision(17);
            os << v;
            return os.str();
        };
        return {{"matches", matches_path},
                {"models", models_s},
                {"out", output_dir},
                {"seed", std::to_string(seed)},
                {"strict", strict ? "true" : "false"},
                {"bt.tol", num(bt.tol)},
                {"bt.max_iter", std::to_string(bt.max_iter)},
                {"poisson.tol", num(poisson_optimizer.tol)},
                {"poisson.max_iter", std::to_string(poisson_optimizer.max_iter)},
                {"poisson.tail_tol", num(poisson_tail_tol)},
                {"poisson.correlated", poisson_correlated ? "true" : "false"},
                {"poisson.window", poisson_window.str()},
                {"mn_dir2.w_grid", list(mn_dir2_grid.w_points)},
                {"mn_dir2.alpha_grid", list(mn_dir2_grid.alpha_points)},
                {"calibration.bins", std::to_string(calibration_bins)}};
    }
};

namespace detail {

inline bool parse_bool(std::string_view v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(key + ": expected true/false, got '" + std::string(v) + "'");
}

inline double parse_double(std::string_view v, const std::string& key) {
    const std::string s(v);
    std::size_t pos = 0;
    double d = 0.0;
    try {
        d = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (s.empty() || pos != s.size()) throw Error(key + ": not a number '" + s + "'");
    return d;
}

inline std::vector<std::string> split_list(std::string_view v) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        const auto comma = v.find(',', start);
        const auto item = trim(v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

/// Applies one key=value setting. Unknown keys are errors.
inline void apply_setting(RunConfig& cfg, const std::string& key, std::string_view raw) {
    const auto value = detail::trim(raw);
    if (key == "matches") {
        cfg.matches_path = std::string(value);
    } else if (key == "models") {
        cfg.models = detail::split_list(value);
        if (cfg.models.empty()) throw Error("models: at least one model required");
    } else if (key == "out") {
        cfg.output_dir = std::string(value);
    } else if (key == "seed") {
        try {
            cfg.seed = std::stoull(std::string(value));
        } catch (const std::exception&) {
            throw Error("seed: not an unsigned integer '" + std::string(value) + "'");
        }
    } else if (key == "strict") {
        cfg.strict = detail::parse_bool(value, key);
    } else if (key == "bt.tol") {
        cfg.bt.tol = detail::parse_double(value, key);
    } else if (key == "bt.max_iter") {
        cfg.bt.max_iter = static_cast<int>(detail::parse_double(value, key));
    } else if (key == "poisson.tol") {
        cfg.poisson_optimizer.tol = detail::parse_double(value, key);
    } else if (key == "poisson.max_iter") {
        cfg.poisson_optimizer.max_iter = static_cast<int>(detail::parse_double(value, key));
    } else if (key == "poisson.tail_tol") {
        cfg.poisson_tail_tol = detail::parse_double(value, key);
        if (!(cfg.poisson_tail_tol > 0.0 && cfg.poisson_tail_tol <= 1e-3))
            throw Error("poisson.tail_tol must lie in (0, 1e-3]");
    } else if (key == "poisson.correlated") {
        cfg.poisson_correlated = detail::parse_bool(value, key);
    } else if (key == "poisson.window") {
        cfg.poisson_window = TrainingWindow::parse(value);
    } else if (key == "mn_dir2.w_grid" || key == "mn_dir2.alpha_grid") {
        std::vector<double> pts;
        for (const auto& item : detail::split_list(value)) pts.push_back(detail::parse_double(item, key));
        (key == "mn_dir2.w_grid" ? cfg.mn_dir2_grid.w_points : cfg.mn_dir2_grid.alpha_points) = pts;
        cfg.mn_dir2_grid.validate();
    } else if (key == "calibration.bins") {
        cfg.calibration_bins = static_cast<int>(detail::parse_double(value, key));
        if (cfg.calibration_bins < 1) throw Error("calibration.bins must be >= 1");
    } else {
        throw Error("unknown config key '" + key + "'");
    }
}

/// key=value lines; '#' starts a comment.
inline void apply_config_text(RunConfig& cfg, std::string_view text) {
    detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) return;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
        try {
            apply_setting(cfg, std::string(detail::trim(line.substr(0, eq))), line.substr(eq + 1));
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
    });
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Builds one predictor from a model spec: mn-dir1, mn-dir2, bt, poisson-lee,
/// poisson-biv, poisson, trivial, or external:<path>.
inline std::unique_ptr<Predictor> make_predictor(const std::string& spec, const RunConfig& cfg) {
    if (spec == "trivial") return std::make_unique<TrivialPredictor>();
    if (spec == "mn-dir1") return std::make_unique<MnDir1Predictor>();
    if (spec == "mn-dir2") return std::make_unique<MnDir2Predictor>(cfg.mn_dir2_grid);
    if (spec == "bt") return std::make_unique<DavidsonPredictor>(cfg.bt);
    if (spec == "poisson-lee")
        return std::make_unique<PoissonPredictor>(PoissonPredictor::lee(cfg.poisson_tail_tol, cfg.poisson_optimizer));
    if (spec == "poisson-biv")
        return std::make_unique<PoissonPredictor>(
            PoissonPredictor::bivariate(cfg.poisson_window, cfg.poisson_tail_tol, cfg.poisson_optimizer));
    if (spec == "poisson")
        return std::make_unique<PoissonPredictor>(
            "poisson", PoissonModelSettings{cfg.poisson_correlated, cfg.poisson_window, cfg.poisson_tail_tol,
                                            cfg.poisson_optimizer});
    constexpr std::string_view ext = "external:";
    if (spec.rfind(ext, 0) == 0) {
        const std::filesystem::path path = spec.substr(ext.size());
        return std::make_unique<ExternalPredictor>(
            ExternalPredictor::from_csv("external:" + path.stem().string(), read_file(path)));
    }
    throw Error("unknown model '" + spec + "'");
}

}  // namespace matchcast
