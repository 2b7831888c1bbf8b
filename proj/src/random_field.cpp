#include "riskvi/random_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "riskvi/io.hpp"

namespace riskvi {

namespace {
constexpr double pi = std::numbers::pi;
}

std::string to_string(NoiseModel model) {
  return model == NoiseModel::MeanZero ? "mean_zero" : "lognormal";
}

NoiseModel parse_noise_model(const std::string& name) {
  if (name == "mean_zero" || name == "meanzero" || name == "mean-zero") {
    return NoiseModel::MeanZero;
  }
  if (name == "lognormal") return NoiseModel::Lognormal;
  throw std::invalid_argument("unknown noise model '" + name + "'");
}

std::vector<double> transcendental_roots(int count, RootFamily family) {
  if (count < 1) throw std::invalid_argument("transcendental_roots: count must be >= 1");
  const auto f = [family](double w) {
    return family == RootFamily::Odd ? 1.0 - w * std::tan(0.5 * w) : std::tan(0.5 * w) + w;
  };

  std::vector<double> roots;
  roots.reserve(static_cast<std::size_t>(count));
  for (int j = 1; j <= count; ++j) {
    // Each root sits on its own branch of tan(w/2); branch ends are the
    // singularities (2k+1)pi, where f tends to -inf (Odd, right end) or
    // -inf (Even, left end).
    double lo, hi;
    if (family == RootFamily::Odd) {
      lo = (j == 1) ? 0.0 : 2.0 * (j - 1) * pi;
      hi = (2.0 * j - 1.0) * pi;
    } else {
      lo = (2.0 * j - 1.0) * pi;
      hi = 2.0 * j * pi;
    }
    // f > 0 on the "positive" end for both families
    const bool positive_at_lo = (family == RootFamily::Odd);
    const double probe = positive_at_lo ? f(lo) : f(hi);
    if (!(probe > 0.0)) {
      throw std::runtime_error("transcendental_roots: bracket failure at root " +
                               std::to_string(j));
    }
    double best = 0.5 * (lo + hi);
    double best_val = f(best);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double fm = f(mid);
      if (std::abs(fm) < std::abs(best_val)) {
        best = mid;
        best_val = fm;
      }
      if (fm == 0.0) break;
      if ((fm > 0.0) == positive_at_lo) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    roots.push_back(best);
  }
  return roots;
}

std::vector<Eigenpair1d> lognormal_eigenpairs_1d(int count) {
  const int half = (count + 1) / 2;
  const auto odd = transcendental_roots(half, RootFamily::Odd);
  const auto even = transcendental_roots(std::max(1, count / 2), RootFamily::Even);
  std::vector<Eigenpair1d> pairs;
  pairs.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) {
    Eigenpair1d p;
    p.cosine = (i % 2 == 1);
    p.w = p.cosine ? odd[static_cast<std::size_t>((i + 1) / 2 - 1)]
                   : even[static_cast<std::size_t>(i / 2 - 1)];
    p.eigenvalue = 2.0 / (p.w * p.w + 1.0);
    const double s = std::sin(p.w) / (2.0 * p.w);
    p.normalization = 1.0 / std::sqrt(p.cosine ? 0.5 + s : 0.5 - s);
    pairs.push_back(p);
  }
  return pairs;
}

double eigenfunction_1d(const Eigenpair1d& pair, double t) {
  return pair.normalization * (pair.cosine ? std::cos(pair.w * t) : std::sin(pair.w * t));
}

KlExpansion cosine_eigenpairs(int m) {
  if (m < 1) throw std::invalid_argument("cosine_eigenpairs: m must be >= 1");
  // all (j, k) with j^2 + k^2 <= R^2 contain the m largest once R^2 >= m + 1
  struct Mode {
    int key;
    int j, k;
  };
  std::vector<Mode> modes;
  const int radius = static_cast<int>(std::ceil(std::sqrt(2.0 * (m + 1)))) + 1;
  for (int j = 1; j <= radius; ++j)
    for (int k = 1; k <= radius; ++k) modes.push_back({j * j + k * k, j, k});
  std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.j != b.j) return a.j < b.j;
    return a.k < b.k;
  });

  KlExpansion e;
  e.kind = NoiseModel::MeanZero;
  e.support = {0.0, 0.5, 0.0, 1.0};
  e.shift = 0.0;
  for (int t = 0; t < m; ++t) {
    KlTerm term;
    term.first = modes[static_cast<std::size_t>(t)].j;
    term.second = modes[static_cast<std::size_t>(t)].k;
    term.eigenvalue = 0.25 * std::exp(-0.25 * pi * modes[static_cast<std::size_t>(t)].key);
    e.terms.push_back(term);
  }
  return e;
}

KlExpansion lognormal_eigenpairs(int m) {
  if (m < 1) throw std::invalid_argument("lognormal_eigenpairs: m must be >= 1");
  // pairs (1, k) for k <= m already give m products no smaller than any
  // product involving a 1D index > m + 1
  const int count = m + 1;
  const auto pairs = lognormal_eigenpairs_1d(count);

  struct Product {
    double value;
    int i, k;
  };
  std::vector<Product> products;
  products.reserve(static_cast<std::size_t>(count * count));
  for (int i = 1; i <= count; ++i) {
    for (int k = 1; k <= count; ++k) {
      products.push_back({pairs[static_cast<std::size_t>(i - 1)].eigenvalue *
                              pairs[static_cast<std::size_t>(k - 1)].eigenvalue,
                          i, k});
    }
  }
  std::sort(products.begin(), products.end(), [](const Product& a, const Product& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.i != b.i) return a.i < b.i;
    return a.k < b.k;
  });

  KlExpansion e;
  e.kind = NoiseModel::Lognormal;
  e.support = {0.0, 0.5, 0.0, 0.5};
  e.shift = -4.0;
  for (int t = 0; t < m; ++t) {
    const auto& pr = products[static_cast<std::size_t>(t)];
    const auto& a = pairs[static_cast<std::size_t>(pr.i - 1)];
    const auto& b = pairs[static_cast<std::size_t>(pr.k - 1)];
    KlTerm term;
    term.eigenvalue = pr.value;
    term.first = pr.i;
    term.second = pr.k;
    term.w1 = a.w;
    term.c1 = a.normalization;
    term.cos1 = a.cosine;
    term.w2 = b.w;
    term.c2 = b.normalization;
    term.cos2 = b.cosine;
    e.terms.push_back(term);
  }
  return e;
}

KlExpansion make_expansion(NoiseModel model) {
  return model == NoiseModel::MeanZero ? cosine_eigenpairs(20) : lognormal_eigenpairs(100);
}

double eigenfunction(const KlTerm& term, NoiseModel kind, Point x) {
  if (kind == NoiseModel::MeanZero) {
    return 2.0 * std::cos(term.first * pi * x.x2) * std::cos(term.second * pi * x.x1);
  }
  // reference formulas live on (-1/2, 1/2)^2
  const double t1 = x.x1 - 0.5;
  const double t2 = x.x2 - 0.5;
  const double f1 = term.c1 * (term.cos1 ? std::cos(term.w1 * t1) : std::sin(term.w1 * t1));
  const double f2 = term.c2 * (term.cos2 ? std::cos(term.w2 * t2) : std::sin(term.w2 * t2));
  return f1 * f2;
}

double evaluate_field(const KlExpansion& expansion, std::span<const double> xi, Point x) {
  if (xi.size() != expansion.size()) {
    throw std::invalid_argument("evaluate_field: xi has length " + std::to_string(xi.size()) +
                                ", expansion has " + std::to_string(expansion.size()) +
                                " terms");
  }
  if (!expansion.support.contains(x)) return 0.0;
  double sum = 0.0;
  for (std::size_t t = 0; t < xi.size(); ++t) {
    const auto& term = expansion.terms[t];
    sum += std::sqrt(term.eigenvalue) * eigenfunction(term, expansion.kind, x) * xi[t];
  }
  return expansion.kind == NoiseModel::Lognormal ? std::exp(expansion.shift + sum) : sum;
}

FieldTabulation::FieldTabulation(const KlExpansion& expansion, const Mesh& mesh)
    : kind_(expansion.kind),
      shift_(expansion.shift),
      nodes_(mesh.node_count()),
      terms_(expansion.size()) {
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    if (!expansion.support.contains(mesh.nodes[i])) continue;
    support_nodes_.push_back(i);
    for (const auto& term : expansion.terms) {
      table_.push_back(std::sqrt(term.eigenvalue) *
                       eigenfunction(term, expansion.kind, mesh.nodes[i]));
    }
  }
}

std::vector<double> FieldTabulation::evaluate(std::span<const double> xi) const {
  if (xi.size() != terms_) throw std::invalid_argument("FieldTabulation: wrong xi length");
  std::vector<double> b(nodes_, 0.0);
  for (std::size_t s = 0; s < support_nodes_.size(); ++s) {
    const double* row = table_.data() + s * terms_;
    double sum = 0.0;
    for (std::size_t t = 0; t < terms_; ++t) sum += row[t] * xi[t];
    b[support_nodes_[s]] = (kind_ == NoiseModel::Lognormal) ? std::exp(shift_ + sum) : sum;
  }
  return b;
}

SampleSet sample_xi(const KlExpansion& expansion, std::size_t n, Rng& rng,
                    std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_xi: n must be >= 1");
  SampleSet set;
  set.seed = seed;
  set.distribution = expansion.kind;
  set.dimension = expansion.size();
  set.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> xi(set.dimension);
    for (auto& c : xi) {
      if (expansion.kind == NoiseModel::MeanZero) {
        c = rng.uniform(-0.2, 0.2);
      } else {
        do {
          c = 3.0 * rng.normal();
        } while (c < -100.0 || c > 100.0);
      }
    }
    set.samples.push_back(std::move(xi));
  }
  return set;
}

SampleSet sample_xi(const KlExpansion& expansion, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_xi(expansion, n, rng, seed);
}

std::string sample_set_csv(const SampleSet& set) {
  std::string out;
  out += "# seed=" + std::to_string(set.seed) + "\n";
  out += "# distribution=" + to_string(set.distribution) + "\n";
  out += "# dimension=" + std::to_string(set.dimension) + "\n";
  out += "sample_index,component_index,value\n";
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    for (std::size_t c = 0; c < set.samples[i].size(); ++c) {
      out += std::to_string(i) + ',' + std::to_string(c) + ',' +
             format_double(set.samples[i][c]) + '\n';
    }
  }
  return out;
}

SampleSet parse_sample_set_csv(const std::string& text) {
  SampleSet set;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const auto key = line.substr(2, eq - 2);
      const auto value = line.substr(eq + 1);
      if (key == "seed") set.seed = std::stoull(value);
      if (key == "distribution") set.distribution = parse_noise_model(value);
      if (key == "dimension") set.dimension = std::stoull(value);
      continue;
    }
    if (!header_seen) {
      if (line != "sample_index,component_index,value") {
        throw std::runtime_error("sample CSV: unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw std::runtime_error("sample CSV: malformed row '" + line + "'");
    }
    const auto i = std::stoull(a);
    const auto k = std::stoull(b);
    if (i >= set.samples.size()) set.samples.resize(i + 1);
    auto& xi = set.samples[i];
    if (k >= xi.size()) xi.resize(k + 1);
    xi[k] = std::stod(c);
  }
  if (!header_seen) throw std::runtime_error("sample CSV: missing header");
  if (set.dimension == 0 && !set.samples.empty()) set.dimension = set.samples.front().size();
  for (const auto& xi : set.samples) {
    if (xi.size() != set.dimension) throw std::runtime_error("sample CSV: ragged sample");
  }
  return set;
}

}  // namespace riskvi
