#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskvi/mesh.hpp"
#include "riskvi/rng.hpp"

namespace riskvi {

enum class NoiseModel { MeanZero, Lognormal };

std::string to_string(NoiseModel model);
NoiseModel parse_noise_model(const std::string& name);

/// Closed axis-aligned rectangle.
struct Rect {
  double x1_lo, x1_hi, x2_lo, x2_hi;
  bool contains(Point p) const {
    return p.x1 >= x1_lo && p.x1 <= x1_hi && p.x2 >= x2_lo && p.x2 <= x2_hi;
  }
};

/// One term of a truncated Karhunen-Loeve expansion.
///
/// MeanZero: phi(x) = 2 cos(first*pi*x2) cos(second*pi*x1).
/// Lognormal: phi(x) = c1 g1(w1 (x1 - 1/2)) * c2 g2(w2 (x2 - 1/2)) where g is
/// cos for odd 1D indices and sin for even ones; `first`/`second` are the 1D
/// indices along x1/x2.
struct KlTerm {
  double eigenvalue = 0.0;
  int first = 0;
  int second = 0;
  double w1 = 0.0, w2 = 0.0;
  double c1 = 1.0, c2 = 1.0;
  bool cos1 = true, cos2 = true;
};

struct KlExpansion {
  NoiseModel kind = NoiseModel::MeanZero;
  std::vector<KlTerm> terms;
  Rect support{};
  /// Constant added to the sum before exponentiation (lognormal only).
  double shift = 0.0;

  std::size_t size() const { return terms.size(); }
};

enum class RootFamily {
  Odd,   ///< positive roots of 1 - w tan(w/2)
  Even,  ///< positive roots of tan(w/2) + w
};

/// First `count` positive roots, one per branch of tan(w/2), by bisection.
std::vector<double> transcendental_roots(int count, RootFamily family);

struct Eigenpair1d {
  double w;
  double eigenvalue;     ///< 2 / (w^2 + 1)
  double normalization;  ///< makes the eigenfunction unit norm on (-1/2, 1/2)
  bool cosine;
};

/// 1D eigenpairs of the exponential kernel on (-1/2, 1/2), index i = 1..count.
std::vector<Eigenpair1d> lognormal_eigenpairs_1d(int count);
double eigenfunction_1d(const Eigenpair1d& pair, double t);

KlExpansion cosine_eigenpairs(int m = 20);
KlExpansion lognormal_eigenpairs(int m = 100);
KlExpansion make_expansion(NoiseModel model);

/// phi_t(x) without the sqrt(lambda) weight; ignores the support rectangle.
double eigenfunction(const KlTerm& term, NoiseModel kind, Point x);

/// b(x) for coefficients xi; zero outside the support rectangle.
double evaluate_field(const KlExpansion& expansion, std::span<const double> xi, Point x);

/// Nodal evaluation of b with sqrt(lambda) phi tabulated once per mesh.
class FieldTabulation {
 public:
  FieldTabulation() = default;
  FieldTabulation(const KlExpansion& expansion, const Mesh& mesh);
  std::vector<double> evaluate(std::span<const double> xi) const;
  std::size_t terms() const { return terms_; }

 private:
  NoiseModel kind_ = NoiseModel::MeanZero;
  double shift_ = 0.0;
  std::size_t nodes_ = 0;
  std::size_t terms_ = 0;
  std::vector<std::size_t> support_nodes_;
  std::vector<double> table_;  // support node major, term minor
};

struct SampleSet {
  std::uint64_t seed = 0;
  NoiseModel distribution = NoiseModel::MeanZero;
  std::size_t dimension = 0;
  std::vector<std::vector<double>> samples;

  std::size_t size() const { return samples.size(); }
};

/// n i.i.d. coefficient vectors: U(-0.2, 0.2) per component (MeanZero) or
/// N(0, 3^2) truncated to [-100, 100] by rejection (Lognormal). Samples are
/// drawn one after another, components in order.
SampleSet sample_xi(const KlExpansion& expansion, std::size_t n, std::uint64_t seed);
/// Same, drawing from an existing stream; `seed` is recorded as metadata.
SampleSet sample_xi(const KlExpansion& expansion, std::size_t n, Rng& rng,
                    std::uint64_t seed);

/// `sample_index,component_index,value` rows after `# key=value` metadata.
std::string sample_set_csv(const SampleSet& set);
SampleSet parse_sample_set_csv(const std::string& text);

}  // namespace riskvi
