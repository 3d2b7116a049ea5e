// qem: bound verification, resolvability scans and QAOA experiments.
//
// Exit codes: 0 success, 1 bound violation, 2 usage or configuration error.
// QEM_OUT_DIR sets the output directory when --out is not given.
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <numbers>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "qem/resolve.hpp"
#include "qem/vqa.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace qem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    std::uint64_t seed = 2021;
    bool seed_set = false;
    std::string out;
    std::vector<std::string> grids;
    int jobs = 1;
};

struct GridAxis {
    std::string name;
    std::vector<double> values;
};

GridAxis parse_grid(const std::string& s) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--grid expects name=start:stop:steps, got '" + s + "'");
    GridAxis g{s.substr(0, eq), {}};
    std::vector<std::string> parts;
    std::stringstream ss(s.substr(eq + 1));
    for (std::string t; std::getline(ss, t, ':');) parts.push_back(t);
    if (parts.size() != 3) throw UsageError("--grid expects name=start:stop:steps, got '" + s + "'");
    double lo, hi;
    long steps;
    try {
        std::size_t used;
        lo = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("");
        hi = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("");
        steps = std::stol(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw UsageError("--grid '" + s + "': start and stop must be numbers and steps an integer");
    }
    if (steps < 1) throw UsageError("--grid '" + s + "': steps must be >= 1");
    for (long i = 0; i < steps; ++i) g.values.push_back(steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1));
    return g;
}

std::vector<GridAxis> parse_grids(const std::vector<std::string>& specs) {
    std::vector<GridAxis> out;
    for (const auto& s : specs) out.push_back(parse_grid(s));
    return out;
}

bool integer_key(const std::string& k) { return k == "n" || k == "M" || k == "L" || k == "k" || k == "model"; }

void check_integers(const std::vector<GridAxis>& axes) {
    for (const auto& a : axes)
        if (integer_key(a.name))
            for (double v : a.values)
                if (std::abs(v - std::round(v)) > 1e-9) throw UsageError("--grid " + a.name + " takes integer values");
}

std::string fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string timestamp() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Manifest inputs determine the hash; timestamps and paths do not.
class Manifest {
public:
    Manifest(std::string command, const Common& c, json inputs, std::string config_text = {})
        : command_(std::move(command)), common_(c) {
        inputs_ = {{"command", command_},    {"master_seed", c.seed}, {"tool_version", QEM_VERSION},
                   {"config", config_text}, {"grids", c.grids},      {"inputs", std::move(inputs)}};
        hash_ = fnv1a(inputs_.dump());
        started_ = timestamp();
        dir_ = out_dir(c);
        fs::create_directories(dir_);
    }

    const std::string& hash() const { return hash_; }

    // Opens a table in the output directory; the first line carries the hash.
    std::ofstream table(const std::string& name) {
        auto p = dir_ / name;
        std::ofstream f(p);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        f << "# manifest " << hash_ << '\n';
        outputs_.push_back(p.string());
        return f;
    }

    void finish() {
        json m = {{"command", command_},
                  {"config_path", common_.config},
                  {"master_seed", common_.seed},
                  {"tool_version", QEM_VERSION},
                  {"started", started_},
                  {"finished", timestamp()},
                  {"outputs", outputs_},
                  {"manifest_hash", hash_},
                  {"inputs", inputs_}};
        std::ofstream f(dir_ / (command_ + ".manifest.json"));
        f << m.dump(2) << '\n';
    }

    static fs::path out_dir(const Common& c) {
        if (!c.out.empty()) return c.out;
        if (const char* e = std::getenv("QEM_OUT_DIR"); e && *e) return e;
        return "out";
    }

private:
    std::string command_;
    Common common_;
    json inputs_;
    std::string hash_, started_;
    fs::path dir_;
    std::vector<std::string> outputs_;
};

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Runs f(i) for i in [0, n) on `jobs` threads; results are stored by index.
template <class F>
void parallel_for(std::size_t n, int jobs, F f) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard lk(mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < std::max(1, jobs); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

// Default grid with the named axes replaced by the given values.
std::vector<resolve::BoundSpec> override_grid(const std::string& bound, const std::vector<GridAxis>& axes) {
    auto base = resolve::default_grid(bound);
    if (axes.empty()) return base;
    std::vector<resolve::BoundSpec> out;
    std::set<std::string> seen;
    for (auto s : base) {
        for (const auto& a : axes) s.params.erase(a.name);
        std::vector<resolve::BoundSpec> acc{s};
        for (const auto& a : axes) {
            std::vector<resolve::BoundSpec> next;
            for (const auto& t : acc)
                for (double v : a.values) {
                    auto u = t;
                    u.params[a.name] = v;
                    next.push_back(u);
                }
            acc = std::move(next);
        }
        for (auto& t : acc)
            if (seen.insert(t.describe()).second) out.push_back(std::move(t));
    }
    return out;
}

int cmd_verify(const Common& c, std::vector<std::string> bounds, std::size_t trials) {
    if (bounds.empty() || (bounds.size() == 1 && bounds[0] == "all")) bounds = resolve::bound_names();
    const auto& known = resolve::bound_names();
    for (const auto& b : bounds)
        if (std::find(known.begin(), known.end(), b) == known.end()) throw UsageError("unknown bound '" + b + "'");
    auto axes = parse_grids(c.grids);
    check_integers(axes);

    struct Item {
        std::size_t bound;
        resolve::BoundSpec spec;
        std::size_t trials;
        resolve::ViolationReport rep;
        std::string error;
    };
    std::vector<Item> items;
    for (std::size_t b = 0; b < bounds.size(); ++b)
        for (auto& s : override_grid(bounds[b], axes))
            items.push_back({b, std::move(s), trials ? trials : resolve::default_trials(bounds[b]), {}, {}});

    Manifest man("verify-bounds", c, {{"bounds", bounds}, {"trials", trials}});
    Rng root(c.seed);
    parallel_for(items.size(), c.jobs, [&](std::size_t i) {
        auto& it = items[i];
        Rng rng = root.split(derive_seed(it.bound, i));
        try {
            it.rep = resolve::verify_bound(it.spec, it.trials, rng);
        } catch (const std::exception& e) {
            it.error = e.what();
        }
    });

    for (const auto& it : items)
        if (!it.error.empty()) throw UsageError(it.spec.name + " {" + it.spec.describe() + "}: " + it.error);

    auto t = man.table("verify_bounds.tsv");
    t << "bound_name\tparams\tformula_value\tsimulated_value\tviolation\n";
    std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
    for (const auto& it : items)
        for (const auto& r : it.rep.rows) {
            t << r.bound_name << '\t' << r.params << '\t' << num(r.formula_value) << '\t' << num(r.simulated_value)
              << '\t' << (r.violation ? 1 : 0) << '\n';
            auto& [n, v] = tally[r.bound_name];
            ++n;
            v += r.violation;
        }
    t.close();
    man.finish();

    int rc = 0;
    for (const auto& b : bounds) {
        auto [n, v] = tally[b];
        std::printf("%-15s %7zu trials  %zu violations\n", b.c_str(), n, v);
        if (v) {
            std::fprintf(stderr, "bound violated: %s\n", b.c_str());
            rc = 1;
        }
    }
    return rc;
}

int cmd_scan(const Common& c, const std::string& protocol, const std::string& noise_kind, int points,
             const std::string& variance) {
    resolve::Protocol proto;
    try {
        proto = resolve::Protocol::parse(protocol);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    if (proto.kind == resolve::Protocol::Kind::identity) throw UsageError("identity is not a mitigation protocol");
    if (variance == "empirical") proto.variance = resolve::VarianceMode::empirical;
    if (points < 2) throw UsageError("--points must be >= 2");

    std::map<std::string, std::vector<double>> axes = {
        {"n", {1}}, {"p", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}}, {"L", {1}}, {"M", {2}}, {"a", {2}}};
    for (auto& g : parse_grids(c.grids)) {
        if (!axes.count(g.name)) throw UsageError("scan-resolvability has no grid axis '" + g.name + "' (n, p, L, M, a)");
        axes[g.name] = g.values;
    }
    check_integers({{"n", axes["n"]}, {"L", axes["L"]}, {"M", axes["M"]}});

    struct Row {
        int n, L, M;
        double p, a;
        resolve::ResolvabilityReport rep;
        double closed_form = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<Row> rows;
    for (double n : axes["n"])
        for (double L : axes["L"])
            for (double M : axes["M"])
                for (double a : axes["a"])
                    for (double p : axes["p"])
                        rows.push_back({static_cast<int>(std::lround(n)), static_cast<int>(std::lround(L)),
                                        static_cast<int>(std::lround(M)), p, a, {}});

    Manifest man("scan-resolvability", c,
                 {{"protocol", protocol}, {"noise", noise_kind}, {"points", points}, {"variance", variance}});
    Rng root(c.seed);
    std::vector<std::string> errors(rows.size());
    parallel_for(rows.size(), c.jobs, [&](std::size_t i) {
        auto& r = rows[i];
        Rng rng = root.split(i);
        try {
            auto circ = densim::random_circuit(r.n, r.L, rng);
            resolve::Landscape land{circ, densim::QuantumState::basis(r.n, 0), resolve::random_observable(r.n, 3, rng)};
            densim::NoisySpec noise;
            if (noise_kind == "global") {
                noise = densim::NoisySpec::global(r.p);
                noise.leading_layer = false;
            } else {
                noise = densim::NoisySpec::uniform_local(r.n, r.p);
            }
            auto pr = proto;
            pr.M = r.M;
            pr.factors = {1.0, r.a};
            pr.nibp_L = -1;
            if (pr.kind == resolve::Protocol::Kind::linear) {
                pr.ansatz.a1 = rng.uniform(0.5, 3.0);
                pr.ansatz.a2 = rng.uniform(-0.5, 0.5);
            }
            std::vector<std::vector<double>> th;
            const auto k = static_cast<std::size_t>(circ.num_params());
            for (int j = 0; j < points; ++j) {
                std::vector<double> v(k);
                for (auto& x : v) x = rng.uniform(0, 2 * std::numbers::pi);
                th.push_back(std::move(v));
            }
            r.rep = points == 2 ? resolve::chi_two_points(land, th[0], th[1], pr, noise)
                                : resolve::chi_average(land, th, pr, noise);
            using K = resolve::Protocol::Kind;
            const bool global = noise_kind == "global";
            if (pr.kind == K::linear) r.closed_form = 1.0;
            if (global && points == 2 && pr.kind == K::vd_b && proto.variance == resolve::VarianceMode::equality)
                r.closed_form = resolve::gamma_vd(r.n, r.M, r.p);
            if (global && points == 2 && pr.kind == K::pec) r.closed_form = resolve::chi_pec_global(r.n, r.p);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!errors[i].empty())
            throw UsageError("n=" + std::to_string(rows[i].n) + " p=" + num(rows[i].p) + ": " + errors[i]);

    auto t = man.table("scan_" + protocol + ".tsv");
    t << "protocol\tnoise\tn\tL\tM\ta\tp\tchi\tgamma\tdelta_noisy\tdelta_mitigated\tclosed_form\n";
    for (const auto& r : rows)
        t << protocol << '\t' << noise_kind << '\t' << r.n << '\t' << r.L << '\t' << r.M << '\t' << num(r.a) << '\t'
          << num(r.p) << '\t' << num(r.rep.chi) << '\t' << num(r.rep.gamma) << '\t' << num(r.rep.delta_noisy) << '\t'
          << num(r.rep.delta_mitigated) << '\t' << num(r.closed_form) << '\n';
    t.close();
    man.finish();
    std::printf("%zu rows written to %s\n", rows.size(), (Manifest::out_dir(c) / ("scan_" + protocol + ".tsv")).c_str());
    return 0;
}

int cmd_qaoa(Common c) {
    std::string text = c.config.empty() ? "{}" : read_file(c.config);
    vqa::ExperimentConfig cfg;
    try {
        cfg = vqa::parse_experiment_config(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (c.seed_set) cfg.seed = c.seed;
    c.seed = cfg.seed;
    cfg.jobs = c.jobs;
    if (!c.grids.empty()) throw UsageError("qaoa takes its sweep from the config file, not --grid");

    Manifest man("qaoa", c, {{"mode", vqa::mode_name(cfg.mode)}}, text);
    auto progress = [](const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); };
    auto rep = vqa::run_optimization_experiment(cfg, progress);

    const std::string stem = "qaoa_" + vqa::mode_name(cfg.mode);
    auto t = man.table(stem + ".tsv");
    t << "graph_id\tmode\tp\tN_tot_checkpoint\tapprox_ratio\tbest_cost_mitigated\tseed\n";
    for (const auto& r : rep.rows)
        t << r.graph_id << '\t' << r.mode << '\t' << r.p << '\t' << r.n_tot_checkpoint << '\t' << num(r.approx_ratio)
          << '\t' << num(r.best_cost_mitigated) << '\t' << r.seed << '\n';
    t.close();
    auto s = man.table(stem + "_summary.tsv");
    s << "mode\tp\tN_tot_checkpoint\tmean_ratio\tstderr\n";
    for (const auto& r : rep.summary) {
        s << r.mode << '\t' << r.p << '\t' << r.n_tot_checkpoint << '\t' << num(r.mean_ratio) << '\t'
          << num(r.stderr_ratio) << '\n';
        std::printf("%s p=%d N_tot<=%llu mean ratio %.4f +- %.4f\n", r.mode.c_str(), r.p,
                    static_cast<unsigned long long>(r.n_tot_checkpoint), r.mean_ratio, r.stderr_ratio);
    }
    s.close();
    auto cs = man.table(stem + "_cells.tsv");
    cs << "graph_id\tp\tshots\tevaluations\ttrainings\tdegenerate_fits\tgraph_redraws\n";
    for (const auto& r : rep.cells)
        cs << r.graph_id << '\t' << r.p << '\t' << r.shots << '\t' << r.evaluations << '\t' << r.trainings << '\t'
           << r.degenerate_fits << '\t' << r.redraws << '\n';
    cs.close();
    man.finish();
    return 0;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "Config file (JSON)");
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&c](const std::uint64_t& s) {
            c.seed = s;
            c.seed_set = true;
        },
        "Master seed");
    sub->add_option("--out", c.out, "Output directory (default $QEM_OUT_DIR or ./out)");
    sub->add_option("--grid", c.grids, "Sweep axis name=start:stop:steps (repeatable)");
    sub->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Error-mitigation resolvability toolkit"};
    app.require_subcommand(1);

    Common common;
    std::vector<std::string> bounds;
    std::size_t trials = 0;
    auto* verify = app.add_subcommand("verify-bounds", "Check closed-form bounds against simulation");
    add_common(verify, common);
    verify->add_option("--bound", bounds, "Bound name or 'all' (repeatable)");
    verify->add_option("--trials", trials, "Trials per grid point (default: per-bound)");

    std::string protocol = "vd_b", noise = "global", variance = "equality";
    int points = 2;
    auto* scan = app.add_subcommand("scan-resolvability", "Relative resolvability over a noise grid");
    add_common(scan, common);
    scan->add_option("--protocol", protocol, "zne_richardson|zne_exp|zne_nibp|vd_a|vd_b|pec|linear");
    scan->add_option("--noise", noise, "Noise model")->check(CLI::IsMember({"global", "local"}));
    scan->add_option("--points", points, "2: two-point chi; more: averaged chi");
    scan->add_option("--variance", variance, "Variance model")->check(CLI::IsMember({"equality", "empirical"}));

    auto* qaoa = app.add_subcommand("qaoa", "QAOA MaxCut optimization under a shot budget");
    add_common(qaoa, common);

    app.add_subcommand("version", "Print the tool version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("version")) {
            std::printf("qem %s\n", QEM_VERSION);
            return 0;
        }
        if (app.got_subcommand(verify)) return cmd_verify(common, bounds, trials);
        if (app.got_subcommand(scan)) return cmd_scan(common, protocol, noise, points, variance);
        if (app.got_subcommand(qaoa)) return cmd_qaoa(common);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failure: %s\n", e.what());
        return 1;
    }
    return 2;
}
