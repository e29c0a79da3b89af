#include "quadnet/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "quadnet/barron.hpp"
#include "quadnet/dataset.hpp"
#include "quadnet/errors.hpp"
#include "quadnet/experiments.hpp"
#include "quadnet/format.hpp"
#include "quadnet/manifold.hpp"
#include "quadnet/network_io.hpp"
#include "quadnet/sobolev.hpp"
#include "quadnet/training.hpp"

namespace quadnet {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::map<std::string, std::string> parse_config(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || key.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789_") != std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": bad key '" + key + "'");
    }
    if (!out.emplace(key, value).second) {
      throw ValidationError("config line " + std::to_string(line_no) + ": repeated key '" + key + "'");
    }
  }
  return out;
}

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx, content.data(), content.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("SHA-1 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

namespace {

struct KeyDef {
  std::string name;
  std::string fallback;
  std::string help;
};

/// Resolved settings for one run: defaults, then config file, then flags.
class Settings {
 public:
  Settings(const std::vector<KeyDef>& defs, const std::map<std::string, std::string>& file,
           const std::map<std::string, std::string>& flags) {
    for (const KeyDef& d : defs) values_[d.name] = d.fallback;
    for (const auto& [k, v] : file) {
      if (!values_.contains(k)) throw ValidationError("unknown config key '" + k + "'");
      values_[k] = v;
    }
    for (const auto& [k, v] : flags) values_[k] = v;
    if (values_["seed"].empty()) {
      const char* env = std::getenv("QUADNET_SEED");
      values_["seed"] = env && *env ? env : "0";
    }
  }

  const std::map<std::string, std::string>& all() const { return values_; }
  const std::string& str(const std::string& key) const { return values_.at(key); }

  double real(const std::string& key) const {
    const std::string& v = str(key);
    try {
      std::size_t pos = 0;
      const double out = std::stod(v, &pos);
      if (pos == v.size()) return out;
    } catch (const std::exception&) {
    }
    throw ValidationError("'" + key + "' expects a number, got '" + v + "'");
  }

  std::uint64_t u64(const std::string& key) const {
    const std::string& v = str(key);
    try {
      std::size_t pos = 0;
      if (!v.empty() && v[0] != '-') {
        const unsigned long long out = std::stoull(v, &pos);
        if (pos == v.size()) return out;
      }
    } catch (const std::exception&) {
    }
    throw ValidationError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }

  std::size_t size(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  std::vector<std::size_t> sizes(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const std::string& s : list(key)) {
      if (s.find_first_not_of("0123456789") != std::string::npos) {
        throw ValidationError("'" + key + "' expects a list of non-negative integers");
      }
      out.push_back(std::stoull(s));
    }
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

/// Collects output files and writes the manifest.
class Outputs {
 public:
  explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + (dir_ / name).string());
    out << content;
    files_.emplace_back(name, git_blob_sha1(content));
    std::clog << "wrote " << (dir_ / name).string() << '\n';
  }

  void manifest(const std::string& subcommand, const Settings& settings, int status) const {
    nlohmann::ordered_json j;
    j["tool"] = "quadnet";
    j["version"] = kToolkitVersion;
    j["subcommand"] = subcommand;
    j["status"] = status;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : settings.all()) cfg[k] = v;
    j["config"] = cfg;
    nlohmann::ordered_json files = nlohmann::ordered_json::object();
    std::string listing;
    for (const auto& [name, hash] : files_) {
      files[name] = hash;
      listing += hash + "  " + name + "\n";
    }
    j["outputs"] = files;
    j["outputs_hash"] = git_blob_sha1(listing);
    const auto now = std::chrono::system_clock::now();
    j["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << j.dump(2) << '\n';
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::vector<KeyDef> common_keys() {
  return {{"seed", "", "random seed (falls back to QUADNET_SEED, then 0)"},
          {"out", "quadnet-out", "output directory"},
          {"jobs", "1", "worker threads"}};
}

std::vector<KeyDef> with_common(std::vector<KeyDef> keys) {
  auto c = common_keys();
  keys.insert(keys.begin(), c.begin(), c.end());
  return keys;
}

// construct

std::vector<KeyDef> construct_keys() {
  return with_common({{"n", "2", "smoothness order"},
                      {"d", "1", "input dimension"},
                      {"eps", "0.1", "target sup error"},
                      {"grid_n", "0", "grid count N per axis (0: choose from eps)"},
                      {"target", "sin", "sin | product | linear | const"},
                      {"amplitude", "0.1", "target amplitude"},
                      {"eval_grid", "0", "sup-error grid points per axis (0: max(10N, 10^(4/d)))"},
                      {"term_cap", "1000000", "largest allowed Taylor term count"}});
}

int run_construct(const Settings& s, Outputs& out) {
  ConstructionSpec spec;
  spec.n = static_cast<int>(s.size("n"));
  spec.d = s.size("d");
  spec.eps = s.real("eps");
  spec.N = s.size("grid_n");
  spec.term_cap = s.size("term_cap");
  const TargetFunction f = make_target(s.str("target"), spec.d, spec.n, s.real("amplitude"));
  const ConstructedNetwork c = assemble(f, spec);
  std::size_t grid = s.size("eval_grid");
  if (grid == 0) {
    grid = std::max<std::size_t>(10 * c.N, static_cast<std::size_t>(
                                               std::ceil(std::pow(1e4, 1.0 / static_cast<double>(spec.d)) - 1e-9)));
  }
  const double err = sup_error(f, c, grid);

  std::ostringstream csv;
  csv << "n,d,eps,N,param_used,param_bound,sup_error\n";
  csv << c.n << ',' << c.d << ',' << fmt17(c.eps) << ',' << c.N << ',' << c.param_used << ',' << c.param_bound << ','
      << fmt17(err) << '\n';
  out.write("construct.csv", csv.str());
  std::ostringstream detail;
  detail << "products,bump_units,param_used,param_bound,param_bound_stated,nonzero_weights,layers\n";
  detail << c.products << ',' << c.bump_units << ',' << c.param_used << ',' << c.param_bound << ','
         << c.param_bound_stated << ',' << c.nonzero_weights << ',' << c.net.layers().size() << '\n';
  out.write("construct_counts.csv", detail.str());
  out.write("network.json", network_to_json(c.net));

  std::clog << "N=" << c.N << " sup_error=" << fmt17(err) << " param_used=" << c.param_used
            << " bound(d+n-2)=" << c.param_bound << " bound(d+n-1)=" << c.param_bound_stated << '\n';
  int status = 0;
  if (!(err <= spec.eps)) {
    std::clog << "sup error exceeds eps\n";
    status = 2;
  }
  if (c.param_used > c.param_bound_stated) {
    std::clog << "parameter count exceeds 4 d^n (N+1)^d (d+n-1)\n";
    status = 2;
  }
  if (c.param_used > c.param_bound) std::clog << "note: parameter count exceeds 4 d^n (N+1)^d (d+n-2)\n";
  return status;
}

// manifold

std::vector<KeyDef> manifold_keys() {
  return with_common({{"atlas", "circle", "circle | sphere | flat, or a JSON atlas file"},
                      {"charts", "4", "chart count for the built-in circle"},
                      {"radius", "0.9", "chart radius for built-in atlases (0: shape default)"},
                      {"d", "2", "dimension of the built-in flat patch"},
                      {"n", "2", "smoothness order"},
                      {"eps", "0.1", "target sup error"},
                      {"target", "coord", "coord (amplitude * x0) | const"},
                      {"amplitude", "0.1", "target amplitude"},
                      {"c_bound", "1", "distance-approximation constant c"},
                      {"samples", "10000", "sampled points per chart"},
                      {"term_cap", "1000000", "per-chart Taylor term limit"}});
}

/// JSON atlas:
///   {"shape": "sphere" | "flat", "reach": 1.0, "shrink": 0.98,
///    "charts": [{"center": [...], "radius": r, "rotation": [[...], ...],
///                "scale": b, "translation": [...]}, ...]}
/// "sphere" charts live on the unit sphere centered at the origin.
ManifoldSpec load_atlas(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open atlas file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("atlas file: ") + e.what());
  }
  try {
    const std::string shape = j.at("shape").get<std::string>();
    if (shape != "sphere" && shape != "flat") throw ValidationError("atlas shape must be sphere or flat");
    ManifoldSpec spec;
    spec.n = n;
    spec.reach = j.at("reach").get<double>();
    spec.strict_reach = j.value("strict_reach", true);
    for (const auto& c : j.at("charts")) {
      Chart chart;
      chart.center = Vector(c.at("center").get<std::vector<double>>());
      chart.radius = c.at("radius").get<double>();
      const auto rows = c.at("rotation").get<std::vector<std::vector<double>>>();
      if (rows.empty()) throw ValidationError("atlas chart has an empty rotation");
      chart.rotation = Matrix(rows.size(), rows.front().size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size()) throw ValidationError("atlas rotation rows differ in length");
        for (std::size_t k = 0; k < rows[r].size(); ++k) chart.rotation(r, k) = rows[r][k];
      }
      chart.scale = c.at("scale").get<double>();
      chart.translation = Vector(c.at("translation").get<std::vector<double>>());
      if (shape == "sphere") {
        attach_sphere_inverse(chart);
      } else {
        attach_flat_inverse(chart);
      }
      spec.charts.push_back(std::move(chart));
    }
    spec.partition = bump_partition(spec.charts, j.value("shrink", 0.98), n + 1);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("atlas file: ") + e.what());
  }
}

int run_manifold(const Settings& s, Outputs& out) {
  const int n = static_cast<int>(s.size("n"));
  const std::string atlas = s.str("atlas");
  const double radius = s.real("radius");
  ManifoldSpec spec;
  if (atlas == "circle") {
    spec = circle_atlas(s.size("charts"), radius > 0.0 ? radius : 0.9, n);
  } else if (atlas == "sphere") {
    spec = sphere_atlas(radius > 0.0 ? radius : 0.97, n);
  } else if (atlas == "flat") {
    spec = flat_atlas(s.size("d"), n);
  } else {
    spec = load_atlas(atlas, n);
  }
  spec.c_bound = s.real("c_bound");
  spec.term_cap = s.size("term_cap");
  const double amplitude = s.real("amplitude");
  std::function<double(std::span<const double>)> h;
  if (s.str("target") == "coord") {
    h = [amplitude](std::span<const double> x) { return amplitude * x[0]; };
  } else if (s.str("target") == "const") {
    h = [amplitude](std::span<const double>) { return amplitude; };
  } else {
    throw ValidationError("manifold target must be coord or const");
  }
  const double eps = s.real("eps");
  const std::size_t samples = s.size("samples");
  const ManifoldApproximation approx = build_manifold_approximator(h, spec, eps, samples);
  const double err = manifold_sup_error(h, spec, approx.net, samples);

  std::ostringstream csv;
  csv << "chart,delta,params,sampled_error\n";
  for (const ChartReport& c : approx.charts) {
    csv << c.chart << ',' << fmt17(c.budget) << ',' << c.params << ',' << fmt17(c.sampled_error) << '\n';
  }
  out.write("manifold.csv", csv.str());
  std::ostringstream detail;
  detail << "chart,N,smoothness,truncation_delta\n";
  for (const ChartReport& c : approx.charts) {
    detail << c.chart << ',' << c.N << ',' << fmt17(c.smoothness) << ',' << fmt17(c.ramp) << '\n';
  }
  out.write("manifold_charts.csv", detail.str());
  std::ostringstream total;
  total << "charts,param_used,sampled_sup_error,eps\n"
        << approx.charts.size() << ',' << approx.param_used << ',' << fmt17(err) << ',' << fmt17(eps) << '\n';
  out.write("manifold_summary.csv", total.str());
  out.write("network.json", network_to_json(approx.net));
  std::clog << "charts=" << approx.charts.size() << " param_used=" << approx.param_used
            << " sampled_sup_error=" << fmt17(err) << '\n';
  return err <= eps ? 0 : 2;
}

// barron-rate

std::vector<KeyDef> barron_keys() {
  return with_common({{"d", "4", "input dimension"},
                      {"atoms", "8", "atoms in the random target"},
                      {"m", "8,16,32,64,128,256,512,1024", "network widths"},
                      {"trials", "20", "trials per width"},
                      {"n_mc", "10000", "Monte-Carlo points"},
                      {"slack", "3", "allowed ratio of mean error to the bound"}});
}

int run_barron(const Settings& s, Outputs& out) {
  const RngStream root(s.u64("seed"));
  RngStream gen = root.split("barron-target");
  const BarronTarget t = random_barron_target(s.size("d"), s.size("atoms"), gen);
  const RateResult r =
      rate_experiment(t, s.sizes("m"), s.size("trials"), s.size("n_mc"), root.split("barron-rate"), s.size("jobs"));
  std::ostringstream csv;
  write_rate_csv(csv, r);
  out.write("barron_rate.csv", csv.str());
  std::clog << "barron_norm=" << fmt17(barron_norm(t)) << " slope=" << fmt17(r.slope) << '\n';
  const double slack = s.real("slack");
  for (const RateRow& row : r.rows) {
    if (row.mean_err > slack * row.bound) {
      std::clog << "mean error above " << slack << " x bound at m=" << row.m << '\n';
      return 2;
    }
  }
  return 0;
}

// bench-hyperspheres

std::vector<KeyDef> hypersphere_keys() {
  return with_common({{"dims", "3,10,20,100,200", "dimensions"},
                      {"widths", "3:8,10:40,20:150,100:350,200:700", "conventional width per dimension"},
                      {"models", "both", "both | quadratic | conventional"},
                      {"seeds", "5", "seeds per cell"},
                      {"epochs", "50", "training epochs"},
                      {"batch_size", "64", "batch size"},
                      {"lr", "0.01", "learning rate"},
                      {"lr_quadratic", "0.01", "learning rate of w2, b2, w3, b3"},
                      {"n_per_class", "2000", "samples per sphere"},
                      {"noise", "0.03", "noise standard deviation"}});
}

int run_hyperspheres(const Settings& s, Outputs& out) {
  HypersphereBenchConfig cfg;
  cfg.dims = s.sizes("dims");
  cfg.widths.clear();
  for (const std::string& item : s.list("widths")) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("widths entries look like d:width");
    try {
      cfg.widths[std::stoull(item.substr(0, colon))] = std::stoull(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw ValidationError("bad widths entry '" + item + "'");
    }
  }
  const std::string models = s.str("models");
  if (models != "both" && models != "quadratic" && models != "conventional") {
    throw ValidationError("models must be both, quadratic or conventional");
  }
  cfg.include_quadratic = models != "conventional";
  cfg.include_conventional = models != "quadratic";
  cfg.seeds = s.size("seeds");
  cfg.epochs = s.size("epochs");
  cfg.batch_size = s.size("batch_size");
  cfg.lr = s.real("lr");
  cfg.lr_quadratic = s.real("lr_quadratic");
  cfg.data.n_per_class = s.size("n_per_class");
  cfg.data.noise_sigma = s.real("noise");
  cfg.seed = s.u64("seed");
  cfg.jobs = s.size("jobs");
  const auto rows = run_hypersphere_benchmark(cfg);
  std::ostringstream csv;
  write_hypersphere_csv(csv, rows);
  out.write("hyperspheres.csv", csv.str());
  return 0;
}

// bench-gmm

std::vector<KeyDef> gmm_keys() {
  return with_common({{"archs", "C(20-150-10),C(20-150-100-10),Q(20-30-10)", "architectures"},
                      {"seeds", "5", "seeds per architecture"},
                      {"epochs", "200", "training epochs"},
                      {"batch_size", "64", "batch size"},
                      {"lr", "0.01", "learning rate"},
                      {"lr_quadratic", "0.0001", "learning rate of w2, b2, w3, b3"},
                      {"n", "5000", "samples"},
                      {"clusters_per_class", "2", "clusters per class"},
                      {"class_sep", "1", "half side of the cluster-mean hypercube"}});
}

int run_gmm(const Settings& s, Outputs& out) {
  GmmBenchConfig cfg;
  cfg.archs = s.list("archs");
  cfg.seeds = s.size("seeds");
  cfg.epochs = s.size("epochs");
  cfg.batch_size = s.size("batch_size");
  cfg.lr = s.real("lr");
  cfg.lr_quadratic = s.real("lr_quadratic");
  cfg.data.n = s.size("n");
  cfg.data.clusters_per_class = s.size("clusters_per_class");
  cfg.data.class_sep = s.real("class_sep");
  cfg.seed = s.u64("seed");
  cfg.jobs = s.size("jobs");
  const auto rows = run_gmm_benchmark(cfg);
  std::ostringstream csv;
  write_gmm_csv(csv, rows);
  out.write("gmm.csv", csv.str());
  return 0;
}

// train

std::vector<KeyDef> train_keys() {
  return with_common({{"data", "", "dataset CSV (empty: generate)"},
                      {"generator", "hyperspheres", "hyperspheres | gmm, used when data is empty"},
                      {"d", "2", "generated dimension"},
                      {"n", "1000", "generated samples (per class for hyperspheres)"},
                      {"classes", "3", "gmm classes"},
                      {"class_sep", "1", "gmm class separation"},
                      {"arch", "single", "single (one quadratic neuron) or C(...)/Q(...)"},
                      {"split", "0.8", "train fraction"},
                      {"epochs", "50", "training epochs"},
                      {"batch_size", "64", "batch size"},
                      {"lr", "0.01", "learning rate"},
                      {"lr_quadratic", "0.01", "learning rate of w2, b2, w3, b3"},
                      {"clip_norm", "0", "gradient clip norm (0: off)"}});
}

int run_train(const Settings& s, Outputs& out) {
  const RngStream root(s.u64("seed"));
  Dataset ds;
  if (!s.str("data").empty()) {
    ds = load_dataset_csv(s.str("data"));
  } else if (s.str("generator") == "hyperspheres") {
    HyperspheresConfig cfg;
    cfg.d = s.size("d");
    cfg.n_per_class = s.size("n");
    RngStream gen = root.split("data");
    ds = gen_hyperspheres(cfg, gen);
  } else if (s.str("generator") == "gmm") {
    GmmConfig cfg;
    cfg.d = s.size("d");
    cfg.n = s.size("n");
    cfg.classes = static_cast<int>(s.size("classes"));
    cfg.class_sep = s.real("class_sep");
    RngStream gen = root.split("data");
    ds = gen_gmm(cfg, gen);
  } else {
    throw ValidationError("generator must be hyperspheres or gmm");
  }
  RngStream split_rng = root.split("split");
  const auto [train_set, test_set] = train_test_split(ds, s.real("split"), split_rng);

  Network net = s.str("arch") == "single" ? single_quadratic_neuron(ds.dim()) : make_network(parse_arch(s.str("arch")));
  RngStream init = root.split("init");
  net = relinear_init(std::move(net), init);
  TrainConfig tc;
  tc.lr = s.real("lr");
  tc.lr_quadratic = s.real("lr_quadratic");
  tc.batch_size = s.size("batch_size");
  tc.epochs = s.size("epochs");
  if (s.real("clip_norm") > 0.0) tc.clip_norm = s.real("clip_norm");
  tc.seed = root.split("shuffle").seed();
  const TrainResult res = train(std::move(net), train_set, test_set, tc);

  std::ostringstream hist, tr, te;
  write_history_csv(hist, res.history);
  write_dataset_csv(tr, train_set);
  write_dataset_csv(te, test_set);
  out.write("history.csv", hist.str());
  out.write("train.csv", tr.str());
  out.write("test.csv", te.str());
  out.write("network.json", network_to_json(res.net));
  std::clog << "test accuracy " << fmt17(evaluate(res.net, test_set)) << '\n';
  return 0;
}

// eval

std::vector<KeyDef> eval_keys() {
  return with_common({{"network", "", "network JSON"},
                      {"data", "", "dataset CSV (optional)"},
                      {"grid", "0", "decision grid resolution (0: off; 2-input networks only)"},
                      {"xlim", "-1.5,1.5", "grid x range"},
                      {"ylim", "-1.5,1.5", "grid y range"}});
}

int run_eval(const Settings& s, Outputs& out) {
  if (s.str("network").empty()) throw ValidationError("eval needs network = <path>");
  const Network net = load_network(s.str("network"));
  if (!s.str("data").empty()) {
    const Dataset ds = load_dataset_csv(s.str("data"));
    std::ostringstream csv;
    csv << "samples,accuracy\n" << ds.size() << ',' << fmt17(evaluate(net, ds)) << '\n';
    out.write("eval.csv", csv.str());
  }
  if (const std::size_t res = s.size("grid"); res > 0) {
    auto range = [&](const std::string& key) {
      const auto parts = s.list(key);
      if (parts.size() != 2) throw ValidationError(key + " expects lo,hi");
      try {
        return std::make_pair(std::stod(parts[0]), std::stod(parts[1]));
      } catch (const std::exception&) {
        throw ValidationError(key + " expects numbers");
      }
    };
    const auto [x0, x1] = range("xlim");
    const auto [y0, y1] = range("ylim");
    std::ostringstream csv;
    write_grid_csv(csv, decision_boundary_grid(net, x0, x1, y0, y1, res));
    out.write("grid.csv", csv.str());
  }
  return 0;
}

struct Command {
  std::string name;
  std::string help;
  std::vector<KeyDef> keys;
  int (*run)(const Settings&, Outputs&);
};

std::vector<Command> commands() {
  return {{"construct", "build a Sobolev approximation network", construct_keys(), run_construct},
          {"manifold", "build a manifold approximation network on an atlas", manifold_keys(), run_manifold},
          {"barron-rate", "measure the two-layer approximation rate on a Barron target", barron_keys(), run_barron},
          {"bench-hyperspheres", "concentric hyperspheres benchmark", hypersphere_keys(), run_hyperspheres},
          {"bench-gmm", "Gaussian mixture benchmark", gmm_keys(), run_gmm},
          {"train", "train one network", train_keys(), run_train},
          {"eval", "evaluate a saved network", eval_keys(), run_eval}};
}

std::string flag_name(const std::string& key) {
  std::string out = key;
  std::replace(out.begin(), out.end(), '_', '-');
  return "--" + out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"quadnet: quadratic neuron toolkit"};
  app.set_version_flag("--version", kToolkitVersion);
  app.require_subcommand(0, 1);
  const auto cmds = commands();
  std::vector<std::map<std::string, std::string>> flag_values(cmds.size());
  std::vector<std::string> config_paths(cmds.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    CLI::App* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    sub->add_option("--config", config_paths[i], "key = value config file");
    for (const KeyDef& k : cmds[i].keys) {
      sub->add_option_function<std::string>(
          flag_name(k.name), [&flag_values, i, key = k.name](const std::string& v) { flag_values[i][key] = v; },
          k.help + (k.fallback.empty() ? "" : " [" + k.fallback + "]"));
    }
    subs.push_back(sub);
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      std::map<std::string, std::string> file;
      if (!config_paths[i].empty()) {
        std::ifstream in(config_paths[i]);
        if (!in) throw ValidationError("cannot open config file " + config_paths[i]);
        std::stringstream buf;
        buf << in.rdbuf();
        file = parse_config(buf.str());
      }
      const Settings settings(cmds[i].keys, file, flag_values[i]);
      Outputs out(settings.str("out"));
      const int status = cmds[i].run(settings, out);
      out.manifest(cmds[i].name, settings, status);
      return status;
    } catch (const ValidationError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    } catch (const NumericalError& e) {
      std::cerr << "numerical failure: " << e.what() << '\n';
      return 2;
    } catch (const std::filesystem::filesystem_error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  std::cerr << app.help();
  return 1;
}

}  // namespace quadnet
