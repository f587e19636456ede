#include "cvarqd/harness.hpp"

#include "cvarqd/csv.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace cvarqd {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

// ---------------------------------------------------------------------------
// presets

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"fig1", "fig2", "paper-fig", "oracle-check"};
    return names;
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig cfg;
    cfg.preset = name;
    cfg.random_game = RandomGameSpec{};
    cfg.random_game.seed = 1;
    cfg.learner.seed = 1;
    cfg.learner.grid = YGrid::uniform(20);
    cfg.learner.total_steps = 50000;
    cfg.learner.schedule = WeightSchedule{0.2, 0.1, 0.6, 0.05};
    cfg.learner.checkpoint_every = 100;
    cfg.topology = "ring(8, 2)";
    cfg.random_game.n_agents = 8;

    if (name == "fig1") {
        cfg.mode = RunMode::kBoth;
        cfg.learner.snapshot_every = 5000;
        cfg.out_dir = "out/fig1";
    } else if (name == "fig2") {
        cfg.mode = RunMode::kBoth;
        cfg.learner.checkpoint_every = 1000;
        cfg.out_dir = "out/fig2";
    } else if (name == "paper-fig") {
        cfg.mode = RunMode::kBoth;
        cfg.topology = "ring(40, 2)";
        cfg.random_game.n_agents = 40;
        cfg.random_game.gamma = 0.7;
        cfg.learner.grid = YGrid::uniform(100);
        cfg.learner.schedule = WeightSchedule{0.2, 0.1, 0.2, 0.3};
        cfg.learner.checkpoint_every = 500;
        cfg.out_dir = "out/paper-fig";
    } else if (name == "oracle-check") {
        cfg.mode = RunMode::kOracle;
        cfg.out_dir = "out/oracle-check";
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// config file

namespace {

const char* mode_name(RunMode m) {
    switch (m) {
        case RunMode::kLearner: return "learner";
        case RunMode::kOracle: return "oracle";
        case RunMode::kBoth: return "both";
    }
    return "both";
}

RunMode parse_mode(const std::string& s) {
    if (s == "learner") return RunMode::kLearner;
    if (s == "oracle") return RunMode::kOracle;
    if (s == "both") return RunMode::kBoth;
    throw std::invalid_argument("unknown mode '" + s + "'");
}

const char* xi_rule_name(XiRule r) { return r == XiRule::kMaximize ? "maximize" : "fixed-one"; }

XiRule parse_xi_rule(const std::string& s) {
    if (s == "maximize") return XiRule::kMaximize;
    if (s == "fixed-one") return XiRule::kFixedOne;
    throw std::invalid_argument("unknown xi_rule '" + s + "'");
}

const char* next_action_name(NextActionChoice c) {
    return c == NextActionChoice::kPerSuccessor ? "per-successor" : "shared";
}

NextActionChoice parse_next_action(const std::string& s) {
    if (s == "per-successor") return NextActionChoice::kPerSuccessor;
    if (s == "shared") return NextActionChoice::kShared;
    throw std::invalid_argument("unknown next_action '" + s + "'");
}

std::string join_numbers(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v[i]);
    }
    return out;
}

template <typename T>
std::vector<T> split_list(const std::string& text) {
    std::vector<T> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        std::istringstream conv(item.substr(first));
        T v{};
        if (!(conv >> v)) throw std::invalid_argument("bad list item '" + item + "'");
        out.push_back(v);
    }
    return out;
}

bool is_uniform_grid(const YGrid& grid) {
    return grid == YGrid::uniform(grid.size());
}

}  // namespace

void write_config(std::ostream& os, const ExperimentConfig& cfg) {
    pt::ptree tree;
    tree.put("experiment.preset", cfg.preset);
    tree.put("experiment.mode", mode_name(cfg.mode));
    tree.put("experiment.out", cfg.out_dir);
    tree.put("experiment.svg", cfg.svg);
    tree.put("experiment.strict", cfg.learner.strict);

    tree.put("game.file", cfg.game_file);
    tree.put("game.seed", cfg.random_game.seed);
    tree.put("game.n_states", cfg.random_game.n_states);
    tree.put("game.n_actions", cfg.random_game.n_actions);
    tree.put("game.gamma", format_double(cfg.random_game.gamma));
    tree.put("game.cost_mean_lo", format_double(cfg.random_game.cost_mean_lo));
    tree.put("game.cost_mean_hi", format_double(cfg.random_game.cost_mean_hi));
    tree.put("game.cost_halfwidth", format_double(cfg.random_game.cost_halfwidth));
    tree.put("game.c_max", cfg.random_game.c_max ? format_double(*cfg.random_game.c_max) : std::string());

    tree.put("topology.graph", cfg.topology);
    tree.put("topology.n_agents", cfg.n_agents);

    const auto& l = cfg.learner;
    tree.put("learner.seed", l.seed);
    tree.put("learner.steps", l.total_steps);
    tree.put("learner.a", format_double(l.schedule.a));
    tree.put("learner.b", format_double(l.schedule.b));
    tree.put("learner.tau1", format_double(l.schedule.tau1));
    tree.put("learner.tau2", format_double(l.schedule.tau2));
    if (is_uniform_grid(l.grid)) {
        tree.put("learner.m", l.grid.size());
        tree.put("learner.levels", "");
    } else {
        tree.put("learner.m", "");
        tree.put("learner.levels", join_numbers(l.grid.levels()));
    }
    tree.put("learner.xi_rule", xi_rule_name(l.xi_rule));
    tree.put("learner.concavity_projection", l.concavity_projection);
    tree.put("learner.checkpoint_every", l.checkpoint_every);
    tree.put("learner.snapshot_every", l.snapshot_every);
    tree.put("learner.q0_lo", format_double(l.q0_lo));
    tree.put("learner.q0_hi", format_double(l.q0_hi));
    tree.put("learner.cost_noise", format_double(l.trajectory.cost_noise));
    tree.put("learner.episode_cap", l.trajectory.episode_cap);
    {
        std::string terminals;
        for (auto s : l.trajectory.terminal_states) {
            if (!terminals.empty()) terminals += ", ";
            terminals += std::to_string(s);
        }
        tree.put("learner.terminal_states", terminals);
    }

    tree.put("oracle.tol", format_double(cfg.oracle_tol));
    tree.put("oracle.max_iters", cfg.oracle_max_iters);
    tree.put("oracle.next_action", next_action_name(cfg.oracle_next_action));
    pt::write_ini(os, tree);
}

ExperimentConfig parse_config(std::istream& is) {
    pt::ptree tree;
    pt::read_ini(is, tree);

    const auto base = tree.get_optional<std::string>("experiment.preset");
    ExperimentConfig cfg = base && !base->empty() && *base != "custom" ? preset(*base) : ExperimentConfig{};
    if (base) cfg.preset = *base;

    auto str = [&](const char* key, std::string& target) {
        if (auto v = tree.get_optional<std::string>(key)) target = *v;
    };
    auto get = [&]<typename T>(const char* key, T& target) {
        if (auto v = tree.get_optional<std::string>(key); v && !v->empty()) target = tree.get<T>(key);
    };

    if (auto v = tree.get_optional<std::string>("experiment.mode")) cfg.mode = parse_mode(*v);
    str("experiment.out", cfg.out_dir);
    get("experiment.svg", cfg.svg);
    get("experiment.strict", cfg.learner.strict);

    str("game.file", cfg.game_file);
    get("game.seed", cfg.random_game.seed);
    get("game.n_states", cfg.random_game.n_states);
    get("game.n_actions", cfg.random_game.n_actions);
    get("game.gamma", cfg.random_game.gamma);
    get("game.cost_mean_lo", cfg.random_game.cost_mean_lo);
    get("game.cost_mean_hi", cfg.random_game.cost_mean_hi);
    get("game.cost_halfwidth", cfg.random_game.cost_halfwidth);
    if (auto v = tree.get_optional<std::string>("game.c_max")) {
        cfg.random_game.c_max = v->empty() ? std::nullopt : std::optional<double>(std::stod(*v));
    }

    str("topology.graph", cfg.topology);
    get("topology.n_agents", cfg.n_agents);

    auto& l = cfg.learner;
    get("learner.seed", l.seed);
    get("learner.steps", l.total_steps);
    get("learner.a", l.schedule.a);
    get("learner.b", l.schedule.b);
    get("learner.tau1", l.schedule.tau1);
    get("learner.tau2", l.schedule.tau2);
    if (auto v = tree.get_optional<std::string>("learner.levels"); v && !v->empty()) {
        l.grid = YGrid(split_list<double>(*v));
    } else if (auto m = tree.get_optional<std::string>("learner.m"); m && !m->empty()) {
        l.grid = YGrid::uniform(tree.get<std::size_t>("learner.m"));
    }
    if (auto v = tree.get_optional<std::string>("learner.xi_rule")) l.xi_rule = parse_xi_rule(*v);
    get("learner.concavity_projection", l.concavity_projection);
    get("learner.checkpoint_every", l.checkpoint_every);
    get("learner.snapshot_every", l.snapshot_every);
    get("learner.q0_lo", l.q0_lo);
    get("learner.q0_hi", l.q0_hi);
    get("learner.cost_noise", l.trajectory.cost_noise);
    get("learner.episode_cap", l.trajectory.episode_cap);
    if (auto v = tree.get_optional<std::string>("learner.terminal_states")) {
        const auto states = split_list<std::size_t>(*v);
        l.trajectory.terminal_states = std::set<std::size_t>(states.begin(), states.end());
    }

    get("oracle.tol", cfg.oracle_tol);
    get("oracle.max_iters", cfg.oracle_max_iters);
    if (auto v = tree.get_optional<std::string>("oracle.next_action")) cfg.oracle_next_action = parse_next_action(*v);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    ExperimentConfig cfg = parse_config(in);
    // Relative game files resolve against the config's directory.
    if (!cfg.game_file.empty() && fs::path(cfg.game_file).is_relative()) {
        cfg.game_file = (fs::path(path).parent_path() / cfg.game_file).string();
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// oracle comparison

OracleComparison compare_to_oracle(const AugmentedQ& learner_mean, const AugmentedQ& oracle) {
    if (!learner_mean.same_shape(oracle)) throw std::invalid_argument("learner and oracle tables differ in shape");
    OracleComparison report;
    double total = 0.0;
    for (std::size_t s = 0; s < oracle.n_states(); ++s) {
        for (std::size_t a = 0; a < oracle.n_actions(); ++a) {
            for (std::size_t j = 0; j < oracle.n_levels(); ++j) {
                const double d = std::abs(learner_mean(s, a, j) - oracle(s, a, j));
                report.cells.push_back({s, a, oracle.grid()[j], d});
                report.sup_distance = std::max(report.sup_distance, d);
                total += d;
            }
        }
    }
    report.mean_distance = total / static_cast<double>(report.cells.size());
    return report;
}

OracleComparison compare_to_oracle(const RunHistory& history, const AugmentedQ& oracle) {
    const auto& agents = history.final_agents.empty() ? history.snapshots.back().agents : history.final_agents;
    return compare_to_oracle(mean_table(agents), oracle);
}

// ---------------------------------------------------------------------------
// CSV

void write_consensus_csv(std::ostream& os, const RunHistory& history) {
    os << "k,spread,concavity_defect\n";
    for (const auto& c : history.checkpoints) {
        os << c.k << ',' << format_double(c.spread) << ',' << format_double(c.concavity_defect) << '\n';
    }
}

void write_q_profile_csv(std::ostream& os, const std::vector<AgentState>& agents) {
    os << "agent,s,a,y,q\n";
    for (const auto& agent : agents) {
        const auto& q = agent.q;
        for (std::size_t s = 0; s < q.n_states(); ++s) {
            for (std::size_t a = 0; a < q.n_actions(); ++a) {
                for (std::size_t j = 0; j < q.n_levels(); ++j) {
                    os << agent.agent_id << ',' << s << ',' << a << ',' << format_double(q.grid()[j]) << ','
                       << format_double(q(s, a, j)) << '\n';
                }
            }
        }
    }
}

void write_snapshots_csv(std::ostream& os, const RunHistory& history) {
    os << "k,agent,s,a,y,q\n";
    for (const auto& snap : history.snapshots) {
        for (const auto& agent : snap.agents) {
            const auto& q = agent.q;
            for (std::size_t s = 0; s < q.n_states(); ++s) {
                for (std::size_t a = 0; a < q.n_actions(); ++a) {
                    for (std::size_t j = 0; j < q.n_levels(); ++j) {
                        os << snap.k << ',' << agent.agent_id << ',' << s << ',' << a << ','
                           << format_double(q.grid()[j]) << ',' << format_double(q(s, a, j)) << '\n';
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// SVG

std::string render_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                              const std::vector<Series>& series) {
    constexpr double W = 720, H = 440, L = 70, R = 170, T = 40, B = 50;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto& s : series) {
        for (double v : s.x) x_lo = std::min(x_lo, v), x_hi = std::max(x_hi, v);
        for (double v : s.y) y_lo = std::min(y_lo, v), y_hi = std::max(y_hi, v);
    }
    if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    if (x_hi == x_lo) x_hi = x_lo + 1;
    if (y_hi == y_lo) y_hi = y_lo + 1, y_lo -= 1;
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    auto px = [&](double x) { return L + (x - x_lo) / (x_hi - x_lo) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y_lo) / (y_hi - y_lo) * (H - T - B); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };
    auto fixed = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
        const double yv = y_lo + (y_hi - y_lo) * i / 4.0;
        os << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << num(xv)
           << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << fixed(py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
           << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << x_label
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (T + H - B) / 2 << ")\">" << y_label << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* colour = palette[i % std::size(palette)];
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t p = 0; p < s.x.size() && p < s.y.size(); ++p) {
            os << (p ? " " : "") << fixed(px(s.x[p])) << ',' << fixed(py(s.y[p]));
        }
        os << "\"/>\n";
        const double ly = T + 14 + 16 * static_cast<double>(i);
        os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 32 << "\" y2=\"" << ly - 4
           << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << W - R + 38 << "\" y=\"" << ly << "\">" << s.label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// run

MarkovGame build_game(const ExperimentConfig& cfg, std::size_t n_agents) {
    if (!cfg.game_file.empty()) {
        std::ifstream in(cfg.game_file);
        if (!in) throw std::runtime_error("cannot open game file " + cfg.game_file);
        return game_from_json(nlohmann::json::parse(in));
    }
    RandomGameSpec spec = cfg.random_game;
    spec.n_agents = n_agents;
    return random_game(spec);
}

GraphTopology build_topology(const ExperimentConfig& cfg) {
    return parse_topology(cfg.topology, cfg.n_agents);
}

namespace {

std::string slice_label(std::size_t s, std::size_t a) {
    return "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
}

void write_text(const fs::path& path, const std::string& text, std::vector<std::string>& files) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    out.close();
    files.push_back(path.string());
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn, std::vector<std::string>& files) {
    std::ostringstream os;
    fn(os);
    write_text(path, os.str(), files);
}

nlohmann::json report_json(const ScheduleReport& report) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return {{"all_passed", report.all_passed()}, {"checks", checks}, {"min_psd_eigenvalue", report.min_psd_eigenvalue}};
}

}  // namespace

ArtifactManifest run_experiment(const ExperimentConfig& cfg) {
    const GraphTopology graph = build_topology(cfg);
    const MarkovGame game = build_game(cfg, graph.n_agents());
    const bool run_learner = cfg.mode != RunMode::kOracle;
    const bool run_oracle = cfg.mode != RunMode::kLearner;

    ArtifactManifest manifest;
    nlohmann::json& summary = manifest.summary;
    summary["preset"] = cfg.preset;
    summary["mode"] = mode_name(cfg.mode);
    summary["n_agents"] = graph.n_agents();
    summary["n_states"] = game.n_states();
    summary["n_actions"] = game.n_actions();
    summary["gamma"] = game.gamma();
    summary["m"] = cfg.learner.grid.size();

    const ScheduleReport schedule = validate_schedule(graph, cfg.learner.schedule);
    summary["schedule_validation"] = report_json(schedule);
    if (run_learner && cfg.learner.strict && !schedule.all_passed()) {
        try {
            enforce_schedule(schedule);
        } catch (const std::runtime_error& e) {
            throw StrictModeViolation(e.what());
        }
    }

    const fs::path out = cfg.out_dir;
    fs::create_directories(out);
    auto& files = manifest.files;
    write_with(out / "config.ini", [&](std::ostream& os) { write_config(os, cfg); }, files);
    write_text(out / "game.json", to_json(game).dump(2) + "\n", files);

    std::optional<RunHistory> history;
    if (run_learner) {
        LearnerConfig lc = cfg.learner;
        lc.strict = false;  // already handled above
        history = run(game, graph, lc);

        write_with(out / "consensus.csv", [&](std::ostream& os) { write_consensus_csv(os, *history); }, files);
        write_with(out / "q_profile.csv", [&](std::ostream& os) { write_q_profile_csv(os, history->final_agents); },
                   files);
        if (cfg.learner.snapshot_every > 0) {
            write_with(out / "q_snapshots.csv", [&](std::ostream& os) { write_snapshots_csv(os, *history); }, files);
        }

        double monotone = -std::numeric_limits<double>::infinity();
        double defect = 0.0;
        for (const auto& agent : history->final_agents) {
            monotone = std::max(monotone, max_monotonicity_violation(agent.q));
            defect = std::max(defect, max_concavity_defect(agent.q));
        }
        const double initial = history->checkpoints.front().spread;
        const double final_spread = history->checkpoints.back().spread;
        summary["learner"] = {
            {"steps", history->steps},
            {"seed", cfg.learner.seed},
            {"initial_spread", initial},
            {"final_spread", final_spread},
            {"spread_ratio", initial > 0 ? final_spread / initial : 0.0},
            {"max_monotonicity_violation", monotone},
            {"monotone_in_y", monotone <= kLearnerMonotoneTolerance},
            {"max_concavity_defect", defect},
            {"final_checkpoint_concavity_defect", history->checkpoints.back().concavity_defect},
            {"max_abs_q", history->max_abs_q},
        };

        if (cfg.svg) {
            Series spread{"consensus spread", {}, {}};
            for (const auto& c : history->checkpoints) {
                spread.x.push_back(static_cast<double>(c.k));
                spread.y.push_back(c.spread);
            }
            write_text(out / "consensus.svg", render_line_chart("Consensus spread", "step k", "max_n |Q_n - Qbar|",
                                                                {spread}),
                       files);

            const AugmentedQ mean = mean_table(history->final_agents);
            std::vector<Series> curves;
            for (std::size_t s = 0; s < mean.n_states(); ++s) {
                for (std::size_t a = 0; a < mean.n_actions(); ++a) {
                    Series c{slice_label(s, a), mean.grid().levels(), {}};
                    for (double v : mean.slice(s, a)) c.y.push_back(v);
                    curves.push_back(std::move(c));
                }
            }
            write_text(out / "q_profile.svg",
                       render_line_chart("Agent-average Q at final step", "confidence level y", "Q(s,a,y)", curves),
                       files);
        }
    }

    if (run_oracle) {
        const ValueIterationResult vi = value_iterate(game, cfg.learner.grid, cfg.oracle_tol, cfg.oracle_max_iters,
                                                      std::nullopt, {InnerMaxMethod::kAuto, cfg.oracle_next_action});
        write_with(out / "oracle_q.csv", [&](std::ostream& os) { write_q_csv(os, vi.q); }, files);

        const auto values = vi.q.values();
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        const double monotone = max_monotonicity_violation(vi.q);
        summary["oracle"] = {
            {"iterations", vi.iterations},
            {"residual", vi.residual},
            {"converged", vi.converged},
            {"next_action", next_action_name(cfg.oracle_next_action)},
            {"q_min", *lo},
            {"q_max", *hi},
            {"max_monotonicity_violation", monotone},
            {"monotone_in_y", monotone <= kOracleMonotoneTolerance},
            {"max_concavity_defect", max_concavity_defect(vi.q)},
        };

        if (history) {
            const OracleComparison cmp = compare_to_oracle(*history, vi.q);
            summary["comparison"] = {{"sup_distance", cmp.sup_distance}, {"mean_distance", cmp.mean_distance}};
        }
        if (cfg.svg) {
            std::vector<Series> curves;
            for (std::size_t s = 0; s < vi.q.n_states(); ++s) {
                for (std::size_t a = 0; a < vi.q.n_actions(); ++a) {
                    Series c{slice_label(s, a), vi.q.grid().levels(), {}};
                    for (double v : vi.q.slice(s, a)) c.y.push_back(v);
                    curves.push_back(std::move(c));
                }
            }
            write_text(out / "oracle_q.svg", render_line_chart("Oracle Q*", "confidence level y", "Q*(s,a,y)", curves),
                       files);
        }
    }

    summary["files"] = files;
    write_text(out / "summary.json", summary.dump(2) + "\n", files);

    std::erase_if(files, [](const std::string& f) {
        std::error_code ec;
        return !fs::exists(f, ec) || fs::file_size(f, ec) == 0;
    });
    return manifest;
}

}  // namespace cvarqd
