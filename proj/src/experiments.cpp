#include "quadnet/experiments.hpp"

#include <cmath>
#include <ostream>
#include <set>
#include <thread>

#include "quadnet/errors.hpp"
#include "quadnet/format.hpp"
#include "quadnet/training.hpp"

namespace quadnet {

void HyperspheresConfig::validate() const {
  if (d < 2) throw ValidationError("hyperspheres: d must be at least 2");
  if (n_per_class == 0) throw ValidationError("hyperspheres: n_per_class must be positive");
  if (!(radius_outer > 0.0 && radius_inner > 0.0) || radius_outer == radius_inner) {
    throw ValidationError("hyperspheres: radii must be positive and distinct");
  }
  if (!(noise_sigma >= 0.0)) throw ValidationError("hyperspheres: noise must be non-negative");
  if (!(split > 0.0 && split < 1.0)) throw ValidationError("hyperspheres: split must be in (0,1)");
}

void GmmConfig::validate() const {
  if (d == 0) throw ValidationError("gmm: d must be positive");
  if (classes < 1) throw ValidationError("gmm: need at least one class");
  if (n < static_cast<std::size_t>(classes)) throw ValidationError("gmm: n must be at least the class count");
  if (clusters_per_class == 0) throw ValidationError("gmm: clusters_per_class must be positive");
  if (!(class_sep >= 0.0)) throw ValidationError("gmm: class_sep must be non-negative");
  if (!(split > 0.0 && split < 1.0)) throw ValidationError("gmm: split must be in (0,1)");
  const std::size_t clusters = clusters_per_class * static_cast<std::size_t>(classes);
  if (d < 63 && clusters > (std::size_t{1} << d)) {
    throw ValidationError("gmm: more clusters than hypercube vertices");
  }
}

Dataset gen_hyperspheres(const HyperspheresConfig& cfg, RngStream& rng) {
  cfg.validate();
  Dataset ds;
  ds.features = Matrix(2 * cfg.n_per_class, cfg.d);
  ds.labels.resize(2 * cfg.n_per_class);
  ds.num_classes = 2;
  ds.generator = "hyperspheres";
  ds.parameters = {{"d", std::to_string(cfg.d)},
                   {"n_per_class", std::to_string(cfg.n_per_class)},
                   {"radius_outer", fmt17(cfg.radius_outer)},
                   {"radius_inner", fmt17(cfg.radius_inner)},
                   {"noise_sigma", fmt17(cfg.noise_sigma)}};
  std::vector<double> dir(cfg.d);
  for (int label = 0; label < 2; ++label) {
    const double radius = label == 0 ? cfg.radius_outer : cfg.radius_inner;
    for (std::size_t i = 0; i < cfg.n_per_class; ++i) {
      double norm = 0.0;
      while (norm == 0.0) {
        for (double& v : dir) v = rng.normal();
        norm = norm2(dir);
      }
      const std::size_t row = static_cast<std::size_t>(label) * cfg.n_per_class + i;
      for (std::size_t k = 0; k < cfg.d; ++k) {
        ds.features(row, k) = radius * (dir[k] / norm) + cfg.noise_sigma * rng.normal();
      }
      ds.labels[row] = label;
    }
  }
  return ds;
}

Dataset gen_gmm(const GmmConfig& cfg, RngStream& rng) {
  cfg.validate();
  const std::size_t clusters = cfg.clusters_per_class * static_cast<std::size_t>(cfg.classes);
  std::set<std::vector<bool>> used;
  std::vector<std::vector<double>> means;
  while (means.size() < clusters) {
    std::vector<bool> vertex(cfg.d);
    for (std::size_t k = 0; k < cfg.d; ++k) vertex[k] = rng.below(2) == 1;
    if (!used.insert(vertex).second) continue;
    std::vector<double> mean(cfg.d);
    for (std::size_t k = 0; k < cfg.d; ++k) mean[k] = vertex[k] ? cfg.class_sep : -cfg.class_sep;
    means.push_back(std::move(mean));
  }
  Dataset ds;
  ds.features = Matrix(cfg.n, cfg.d);
  ds.labels.resize(cfg.n);
  ds.num_classes = cfg.classes;
  ds.generator = "gmm";
  ds.parameters = {{"d", std::to_string(cfg.d)},
                   {"n", std::to_string(cfg.n)},
                   {"classes", std::to_string(cfg.classes)},
                   {"clusters_per_class", std::to_string(cfg.clusters_per_class)},
                   {"class_sep", fmt17(cfg.class_sep)}};
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const std::size_t cluster = i % clusters;
    for (std::size_t k = 0; k < cfg.d; ++k) ds.features(i, k) = means[cluster][k] + rng.normal();
    ds.labels[i] = static_cast<int>(cluster % static_cast<std::size_t>(cfg.classes));
  }
  return ds;
}

Network single_quadratic_neuron(std::size_t d) {
  Layer neuron(NeuronKind::quadratic, d, 1, Activation::identity);
  Layer readout(NeuronKind::conventional, 1, 2, Activation::identity);
  readout.w1()(0, 0) = 1.0;
  readout.w1()(1, 0) = -1.0;
  readout.set_frozen(true);
  return Network({std::move(neuron), std::move(readout)});
}

void run_jobs(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& job) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs);
  for (std::size_t w = 0; w < std::min(jobs, count); ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += jobs) job(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

std::size_t trainable_params(const Network& net) {
  std::size_t total = 0;
  for (const Layer& l : net.layers()) {
    if (!l.frozen()) total += l.param_count();
  }
  return total;
}

void summarize(const std::vector<double>& acc, double& mean, double& sd) {
  mean = 0.0;
  for (double a : acc) mean += a;
  mean /= static_cast<double>(acc.size());
  sd = 0.0;
  if (acc.size() > 1) {
    for (double a : acc) sd += (a - mean) * (a - mean);
    sd = std::sqrt(sd / static_cast<double>(acc.size() - 1));
  }
}

/// Fresh train/test data for one (generator, dimension, seed) cell.
std::pair<Dataset, Dataset> hypersphere_data(const HypersphereBenchConfig& cfg, std::size_t d, std::size_t s) {
  RngStream rng = RngStream(cfg.seed).split("hyperspheres").split(d).split(s);
  HyperspheresConfig data = cfg.data;
  data.d = d;
  RngStream gen = rng.split("data");
  const Dataset ds = gen_hyperspheres(data, gen);
  RngStream split = rng.split("split");
  return train_test_split(ds, data.split, split);
}

}  // namespace

std::vector<HypersphereRow> run_hypersphere_benchmark(const HypersphereBenchConfig& cfg) {
  struct Job {
    std::size_t row;
    std::size_t seed_index;
  };
  std::vector<HypersphereRow> rows;
  for (std::size_t d : cfg.dims) {
    if (cfg.include_quadratic) {
      HypersphereRow r;
      r.d = d;
      r.kind = NeuronKind::quadratic;
      r.neurons = 1;
      r.params = trainable_params(single_quadratic_neuron(d));
      rows.push_back(r);
    }
    if (cfg.include_conventional) {
      auto it = cfg.widths.find(d);
      if (it == cfg.widths.end()) throw ValidationError("hyperspheres: no conventional width for d = " + std::to_string(d));
      HypersphereRow r;
      r.d = d;
      r.kind = NeuronKind::conventional;
      r.neurons = it->second;
      r.params = param_count(make_network(ArchSpec{NeuronKind::conventional, {d, it->second, 2}}));
      rows.push_back(r);
    }
  }
  if (cfg.seeds == 0) throw ValidationError("hyperspheres: need at least one seed");
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t s = 0; s < cfg.seeds; ++s) jobs.push_back({r, s});
  }
  std::vector<double> acc(jobs.size());
  run_jobs(jobs.size(), cfg.jobs, [&](std::size_t j) {
    const HypersphereRow& row = rows[jobs[j].row];
    const auto [train_set, test_set] = hypersphere_data(cfg, row.d, jobs[j].seed_index);
    RngStream rng = RngStream(cfg.seed)
                        .split("hyperspheres-train")
                        .split(row.d)
                        .split(std::string(to_string(row.kind)))
                        .split(jobs[j].seed_index);
    Network net = row.kind == NeuronKind::quadratic
                      ? single_quadratic_neuron(row.d)
                      : make_network(ArchSpec{NeuronKind::conventional, {row.d, row.neurons, 2}});
    RngStream init = rng.split("init");
    net = relinear_init(std::move(net), init);
    TrainConfig tc;
    tc.lr = cfg.lr;
    tc.lr_quadratic = cfg.lr_quadratic;
    tc.batch_size = cfg.batch_size;
    tc.epochs = cfg.epochs;
    tc.seed = rng.split("shuffle").seed();
    const TrainResult res = train(std::move(net), train_set, test_set, tc);
    acc[j] = 100.0 * evaluate(res.net, test_set);
  });
  for (std::size_t j = 0; j < jobs.size(); ++j) rows[jobs[j].row].per_seed.push_back(acc[j]);
  for (HypersphereRow& r : rows) summarize(r.per_seed, r.acc_mean, r.acc_std);
  return rows;
}

void write_hypersphere_csv(std::ostream& out, const std::vector<HypersphereRow>& rows) {
  out << "d,kind,neurons,params,acc_mean,acc_std\n";
  for (const HypersphereRow& r : rows) {
    out << r.d << ',' << to_string(r.kind) << ',' << r.neurons << ',' << r.params << ',' << fmt17(r.acc_mean) << ','
        << fmt17(r.acc_std) << '\n';
  }
}

std::vector<GmmRow> run_gmm_benchmark(const GmmBenchConfig& cfg) {
  if (cfg.seeds == 0) throw ValidationError("gmm: need at least one seed");
  std::vector<ArchSpec> archs;
  std::vector<GmmRow> rows;
  for (const std::string& a : cfg.archs) {
    ArchSpec spec = parse_arch(a);
    const Network net = make_network(spec);
    GmmRow r;
    r.arch = spec.to_string();
    r.params = param_count(net);
    r.flops = flop_count(net);
    rows.push_back(r);
    archs.push_back(std::move(spec));
  }
  const std::size_t count = archs.size() * cfg.seeds;
  std::vector<double> acc(count);
  run_jobs(count, cfg.jobs, [&](std::size_t j) {
    const ArchSpec& arch = archs[j / cfg.seeds];
    const std::size_t s = j % cfg.seeds;
    GmmConfig data = cfg.data;
    data.d = arch.widths.front();
    data.classes = static_cast<int>(arch.widths.back());
    // data depends only on (d, classes, seed) so every architecture sees the same samples
    RngStream root = RngStream(cfg.seed).split("gmm").split(data.d).split(static_cast<std::uint64_t>(data.classes)).split(s);
    RngStream gen = root.split("data");
    const Dataset ds = gen_gmm(data, gen);
    RngStream split = root.split("split");
    const auto [train_set, test_set] = train_test_split(ds, data.split, split);

    RngStream rng = RngStream(cfg.seed).split("gmm-train").split(arch.to_string()).split(s);
    RngStream init = rng.split("init");
    Network net = relinear_init(make_network(arch), init);
    TrainConfig tc;
    tc.lr = cfg.lr;
    tc.lr_quadratic = cfg.lr_quadratic;
    tc.batch_size = cfg.batch_size;
    tc.epochs = cfg.epochs;
    tc.seed = rng.split("shuffle").seed();
    const TrainResult res = train(std::move(net), train_set, test_set, tc);
    acc[j] = 100.0 * evaluate(res.net, test_set);
  });
  for (std::size_t j = 0; j < count; ++j) rows[j / cfg.seeds].per_seed.push_back(acc[j]);
  for (GmmRow& r : rows) summarize(r.per_seed, r.acc_mean, r.acc_std);
  return rows;
}

void write_gmm_csv(std::ostream& out, const std::vector<GmmRow>& rows) {
  out << "structure,params,flops,acc_mean,acc_std\n";
  for (const GmmRow& r : rows) {
    out << r.arch << ',' << r.params << ',' << r.flops << ',' << fmt17(r.acc_mean) << ',' << fmt17(r.acc_std) << '\n';
  }
}

double ClassGrid::x(std::size_t ix) const {
  return resolution > 1 ? xmin + (xmax - xmin) * static_cast<double>(ix) / static_cast<double>(resolution - 1) : xmin;
}

double ClassGrid::y(std::size_t iy) const {
  return resolution > 1 ? ymin + (ymax - ymin) * static_cast<double>(iy) / static_cast<double>(resolution - 1) : ymin;
}

ClassGrid decision_boundary_grid(const Network& net, double xmin, double xmax, double ymin, double ymax,
                                 std::size_t resolution) {
  if (net.input_dim() != 2) throw ValidationError("decision grid needs a network with 2 inputs");
  if (resolution == 0) throw ValidationError("decision grid resolution must be positive");
  if (!(xmax > xmin) || !(ymax > ymin)) throw ValidationError("decision grid box is empty");
  ClassGrid g{resolution, xmin, xmax, ymin, ymax, std::vector<int>(resolution * resolution)};
  for (std::size_t iy = 0; iy < resolution; ++iy) {
    for (std::size_t ix = 0; ix < resolution; ++ix) {
      const double p[2] = {g.x(ix), g.y(iy)};
      g.cells[iy * resolution + ix] = static_cast<int>(predict(net, p));
    }
  }
  return g;
}

void write_grid_csv(std::ostream& out, const ClassGrid& grid) {
  out << "x,y,class\n";
  for (std::size_t iy = 0; iy < grid.resolution; ++iy) {
    for (std::size_t ix = 0; ix < grid.resolution; ++ix) {
      out << fmt17(grid.x(ix)) << ',' << fmt17(grid.y(iy)) << ',' << grid.at(ix, iy) << '\n';
    }
  }
}

bool region_touches_border(const ClassGrid& grid, std::size_t ix, std::size_t iy) {
  const std::size_t n = grid.resolution;
  if (ix >= n || iy >= n) throw ValidationError("flood fill start outside the grid");
  const int cls = grid.at(ix, iy);
  std::vector<bool> seen(n * n, false);
  std::vector<std::pair<std::size_t, std::size_t>> stack{{ix, iy}};
  seen[iy * n + ix] = true;
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    if (x == 0 || y == 0 || x + 1 == n || y + 1 == n) return true;
    const std::pair<std::size_t, std::size_t> next[] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
    for (const auto& [nx, ny] : next) {
      if (!seen[ny * n + nx] && grid.at(nx, ny) == cls) {
        seen[ny * n + nx] = true;
        stack.emplace_back(nx, ny);
      }
    }
  }
  return false;
}

}  // namespace quadnet
