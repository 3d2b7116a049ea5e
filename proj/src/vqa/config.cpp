#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "qem/vqa.hpp"

namespace qem::vqa {

namespace {

using nlohmann::json;

class Reader {
public:
    std::vector<std::string> errors;

    void known(const json& obj, const std::string& where, const std::set<std::string>& keys) {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!keys.count(it.key())) errors.push_back(where + it.key() + ": unknown key");
    }

    template <class T, class Check>
    void get(const json& obj, const std::string& where, const std::string& key, T& out, Check ok, const char* rule) {
        if (!obj.contains(key)) return;
        try {
            T v = obj.at(key).get<T>();
            if (!ok(v)) {
                errors.push_back(where + key + ": must be " + rule);
                return;
            }
            out = v;
        } catch (const json::exception&) {
            errors.push_back(where + key + ": wrong type");
        }
    }

    const json* section(const json& root, const std::string& key) {
        if (!root.contains(key)) return nullptr;
        if (!root.at(key).is_object()) {
            errors.push_back(key + ": must be an object");
            return nullptr;
        }
        return &root.at(key);
    }
};

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw std::invalid_argument("config must be a JSON object");

    ExperimentConfig c;
    Reader r;
    r.known(root, "", {"mode", "n", "rounds", "graphs", "edge_prob", "seed", "swap_network", "noise", "optimizer",
                       "sample_shots", "cdr", "vd", "jobs"});
    if (!root.contains("mode")) {
        r.errors.push_back("mode: required (exact, noisy, cdr or vd)");
    } else {
        try {
            c.mode = parse_mode(root.at("mode").get<std::string>());
        } catch (const std::exception& e) {
            r.errors.push_back(std::string("mode: ") + e.what());
        }
    }
    auto any = [](const auto&) { return true; };
    r.get(root, "", "n", c.n, [](int v) { return v >= 2 && v <= 10; }, "an integer in [2,10]");
    r.get(root, "", "rounds", c.rounds,
          [](const std::vector<int>& v) {
              if (v.empty()) return false;
              for (int p : v)
                  if (p < 1 || p > 8) return false;
              return true;
          },
          "a nonempty list of integers in [1,8]");
    r.get(root, "", "graphs", c.graphs, [](int v) { return v >= 1; }, ">= 1");
    r.get(root, "", "edge_prob", c.edge_prob, [](double v) { return v >= 0.0 && v <= 1.0; }, "in [0,1]");
    r.get(root, "", "seed", c.seed, any, "an unsigned integer");
    r.get(root, "", "swap_network", c.swap_network, any, "a boolean");
    r.get(root, "", "sample_shots", c.sample_shots, any, "a boolean");
    r.get(root, "", "jobs", c.jobs, [](int v) { return v >= 1; }, ">= 1");

    if (const json* s = r.section(root, "noise")) {
        r.known(*s, "noise.", {"p"});
        r.get(*s, "noise.", "p", c.noise_p, [](double v) { return v >= 0.0 && v <= 1.0; }, "in [0,1]");
    }
    if (const json* s = r.section(root, "optimizer")) {
        r.known(*s, "optimizer.", {"n_init", "shots_per_eval", "checkpoints", "tol_f", "tol_x", "max_iterations"});
        r.get(*s, "optimizer.", "n_init", c.n_init, [](int v) { return v >= 1; }, ">= 1");
        r.get(*s, "optimizer.", "shots_per_eval", c.shots_per_eval, [](std::uint64_t v) { return v >= 1; }, ">= 1");
        r.get(*s, "optimizer.", "checkpoints", c.checkpoints,
              [](const std::vector<std::uint64_t>& v) {
                  if (v.empty()) return false;
                  for (std::size_t i = 1; i < v.size(); ++i)
                      if (v[i] <= v[i - 1]) return false;
                  return true;
              },
              "a nonempty strictly increasing list of shot counts");
        r.get(*s, "optimizer.", "tol_f", c.nm.tol_f, [](double v) { return v >= 0.0; }, ">= 0");
        r.get(*s, "optimizer.", "tol_x", c.nm.tol_x, [](double v) { return v >= 0.0; }, ">= 0");
        r.get(*s, "optimizer.", "max_iterations", c.nm.max_iterations, [](std::uint64_t v) { return v >= 1; }, ">= 1");
    }
    if (const json* s = r.section(root, "cdr")) {
        r.known(*s, "cdr.", {"training_circuits", "max_nonclifford", "refresh_distance"});
        r.get(*s, "cdr.", "training_circuits", c.cdr_training, [](int v) { return v >= 2; }, ">= 2");
        r.get(*s, "cdr.", "max_nonclifford", c.cdr_max_nonclifford, [](int v) { return v >= 0; }, ">= 0");
        r.get(*s, "cdr.", "refresh_distance", c.cdr_refresh_distance, [](double v) { return v >= 0.0; }, ">= 0");
    }
    if (const json* s = r.section(root, "vd")) {
        r.known(*s, "vd.", {"copies", "shots_per_term"});
        r.get(*s, "vd.", "copies", c.vd_copies, [](int v) { return v == 2 || v == 3; }, "2 or 3");
        r.get(*s, "vd.", "shots_per_term", c.vd_shots_per_term, [](std::uint64_t v) { return v >= 1; }, ">= 1");
    }
    if (!r.errors.empty()) {
        std::ostringstream os;
        os << r.errors.size() << " config error(s):";
        for (const auto& e : r.errors) os << "\n  " << e;
        throw std::invalid_argument(os.str());
    }
    return c;
}

}  // namespace qem::vqa
