#include "quadnet/barron.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "quadnet/errors.hpp"
#include "quadnet/format.hpp"
#include "quadnet/neuron.hpp"

namespace quadnet {

namespace {

QuadraticParams atom_params(const BarronAtom& a) { return QuadraticParams{a.w1, a.b1, a.w2, a.b2, a.w3, a.b3}; }

}  // namespace

void BarronTarget::validate() const {
  if (d == 0) throw ValidationError("barron target: d must be positive");
  if (atoms.empty()) throw ValidationError("barron target: no atoms");
  double total = 0.0;
  for (const BarronAtom& a : atoms) {
    if (a.w1.size() != d || a.w2.size() != d || a.w3.size() != d) {
      throw ValidationError("barron target: atom weights must have length d");
    }
    if (!(a.alpha >= 0.0)) throw ValidationError("barron target: negative atom probability");
    total += a.alpha;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("barron target: atom probabilities must sum to 1");
}

double eval_target(const BarronTarget& t, std::span<const double> x) {
  if (x.size() != t.d) throw ValidationError("eval_target: point has the wrong dimension");
  double g = 0.0;
  for (const BarronAtom& a : t.atoms) g += a.alpha * a.a * relu(quad_preactivation(atom_params(a), x));
  return g;
}

double barron_norm(const BarronTarget& t) {
  double acc = 0.0;
  for (const BarronAtom& a : t.atoms) {
    const double c = (norm1(a.w1) + std::abs(a.b1)) * (norm1(a.w2) + std::abs(a.b2)) + norm1(a.w3) + std::abs(a.b3);
    acc += a.alpha * a.a * a.a * c * c;
  }
  return std::sqrt(acc);
}

Network sample_network(const BarronTarget& t, std::size_t m, RngStream& rng) {
  t.validate();
  if (m == 0) throw ValidationError("sample_network: m must be positive");
  Layer hidden(NeuronKind::quadratic, t.d, m, Activation::relu);
  Layer out(NeuronKind::conventional, m, 1, Activation::identity);
  for (std::size_t j = 0; j < m; ++j) {
    const double u = rng.uniform();
    std::size_t k = 0;
    double cdf = t.atoms[0].alpha;
    while (u >= cdf && k + 1 < t.atoms.size()) cdf += t.atoms[++k].alpha;
    hidden.set_neuron(j, atom_params(t.atoms[k]));
    out.w1()(0, j) = t.atoms[k].a / static_cast<double>(m);
  }
  return Network({std::move(hidden), std::move(out)});
}

BarronTarget random_barron_target(std::size_t d, std::size_t atoms, RngStream& rng) {
  if (d == 0 || atoms == 0) throw ValidationError("random target: d and atom count must be positive");
  BarronTarget t;
  t.d = d;
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  double total = 0.0;
  for (std::size_t k = 0; k < atoms; ++k) {
    BarronAtom a;
    a.alpha = rng.uniform();
    a.a = rng.normal();
    for (Vector* w : {&a.w1, &a.w2, &a.w3}) {
      *w = Vector(d);
      for (std::size_t j = 0; j < d; ++j) (*w)[j] = rng.normal(0.0, sd);
    }
    a.b1 = rng.normal();
    a.b2 = rng.normal();
    a.b3 = rng.normal();
    total += a.alpha;
    t.atoms.push_back(std::move(a));
  }
  for (BarronAtom& a : t.atoms) a.alpha /= total;
  return t;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw NumericalError("slope fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

RateResult rate_experiment(const BarronTarget& t, const std::vector<std::size_t>& m_list, std::size_t trials,
                           std::size_t n_mc, const RngStream& rng, std::size_t jobs) {
  t.validate();
  if (m_list.empty() || trials == 0 || n_mc == 0) throw ValidationError("rate experiment: empty configuration");
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (m_list[i] == 0 || (i > 0 && m_list[i] <= m_list[i - 1])) {
      throw ValidationError("rate experiment: m values must be positive and increasing");
    }
  }
  RngStream mc = rng.split("mc");
  Matrix points(n_mc, t.d);
  std::vector<double> target(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    for (std::size_t j = 0; j < t.d; ++j) points(i, j) = mc.uniform();
    target[i] = eval_target(t, points.row(i));
  }

  const double norm = barron_norm(t);
  RateResult result;
  std::vector<double> ms, errs;
  for (std::size_t m : m_list) {
    std::vector<double> err(trials);
    auto run = [&](std::size_t trial) {
      RngStream draw = rng.split("m").split(m).split(trial);
      const Network net = sample_network(t, m, draw);
      double acc = 0.0;
      for (std::size_t i = 0; i < n_mc; ++i) {
        const double diff = net.forward(points.row(i))[0] - target[i];
        acc += diff * diff;
      }
      err[trial] = acc / static_cast<double>(n_mc);
    };
    if (jobs <= 1) {
      for (std::size_t k = 0; k < trials; ++k) run(k);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t k = w; k < trials; k += jobs) run(k);
        });
      }
      for (auto& th : pool) th.join();
    }
    RateRow row;
    row.m = m;
    for (double e : err) row.mean_err += e;
    row.mean_err /= static_cast<double>(trials);
    if (trials > 1) {
      for (double e : err) row.std_err += (e - row.mean_err) * (e - row.mean_err);
      row.std_err = std::sqrt(row.std_err / static_cast<double>(trials - 1));
    }
    row.bound = 2.0 * norm * norm / static_cast<double>(m);
    result.rows.push_back(row);
    ms.push_back(static_cast<double>(m));
    errs.push_back(row.mean_err);
  }
  const bool all_zero = std::all_of(errs.begin(), errs.end(), [](double e) { return e == 0.0; });
  result.slope = all_zero || ms.size() < 2 ? 0.0 : loglog_slope(ms, errs);
  return result;
}

void write_rate_csv(std::ostream& out, const RateResult& r) {
  out << "m,mean_err,std_err,bound,slope\n";
  for (const RateRow& row : r.rows) {
    out << row.m << ',' << fmt17(row.mean_err) << ',' << fmt17(row.std_err) << ',' << fmt17(row.bound) << ','
        << fmt17(r.slope) << '\n';
  }
}

}  // namespace quadnet
