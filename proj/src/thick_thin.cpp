#include "pinchlab/thick_thin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "internal/json_util.hpp"
#include "pinchlab/errors.hpp"

namespace pinchlab {
namespace {

constexpr double kSeparationMargin = 1e-6;
constexpr std::size_t kMaxRecordedViolations = 16;

// |s| at which inj reaches the level v, assuming l/2 < v < inj(X).
double level_crossing(const CollarParams& c, double v) {
  double lo = 0.0;
  double hi = c.half_width();
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (injectivity_radius(c, mid) < v) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double boundary_inj(const CollarParams& c) { return std::asinh(c.cosh_half()); }

void require_positive(const char* name, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive and finite");
}

}  // namespace

void ThickThinQuery::validate() const {
  auto check = [](const char* n, const std::optional<double>& v) {
    if (v) require_positive(n, *v);
  };
  check("delta", delta);
  check("beta", beta);
  check("epsilon", epsilon);
  check("Q", Q);
  if (beta && epsilon && !(*epsilon < *beta)) throw DomainError("epsilon must be smaller than beta");
}

bool SRegion::contains(double s) const noexcept {
  return std::any_of(intervals.begin(), intervals.end(), [s](const Interval& i) { return i.lo <= s && s <= i.hi; });
}

double SRegion::measure() const noexcept {
  double m = 0.0;
  for (const auto& i : intervals) m += i.hi - i.lo;
  return m;
}

SRegion thin_interval(const CollarParams& c, double delta) {
  require_positive("delta", delta);
  const double x = c.half_width();
  if (delta <= 0.5 * c.ell()) return {};
  if (delta >= boundary_inj(c)) return {{{-x, x}}};
  const double a = level_crossing(c, delta);
  return {{{-a, a}}};
}

SRegion thick_region(const CollarParams& c, double delta) {
  require_positive("delta", delta);
  const double x = c.half_width();
  if (delta <= 0.5 * c.ell()) return {{{-x, x}}};
  if (delta > boundary_inj(c)) return {};
  const double b = level_crossing(c, delta);
  return {{{-x, -b}, {b, x}}};
}

double epsilon_for_separation(double beta, double Q) {
  require_positive("beta", beta);
  require_positive("Q", Q);
  const double q_cap = std::asinh(std::sinh(beta) * std::exp(-Q) / (1.0 + std::numbers::sqrt2));
  return (1.0 - kSeparationMargin) * std::min({beta, kAsinhOne, q_cap});
}

SeparationResult separation_check(const CollarParams& c, double beta, double epsilon) {
  ThickThinQuery{std::nullopt, beta, epsilon, std::nullopt}.validate();
  SeparationResult r;
  r.proof_lower_bound = -std::log(std::sinh(epsilon)) + std::log(std::sinh(beta) / (1.0 + std::numbers::sqrt2));
  const auto thick = thick_region(c, beta);
  const auto thin = thin_interval(c, epsilon);
  r.thick_empty = thick.empty();
  r.thin_empty = thin.empty();
  if (r.empty()) return r;
  // Deepest thick point and shallowest thin point sit on the same side; the
  // distance between them is the Fermi-coordinate gap.
  const double a = thin.intervals.front().hi;
  const double b = thick.intervals.back().lo;
  r.distance = std::max(0.0, fermi_coordinate(c, b) - fermi_coordinate(c, a));
  return r;
}

NestedFamily nested_sets(std::span<const double> times, std::span<const InjProfile> profiles,
                         std::span<const double> lengths_L, double K0, double mu, std::optional<double> mu_tilde) {
  const std::size_t nt = times.size();
  if (profiles.size() != nt || lengths_L.size() != nt) throw DomainError("nested_sets: times, profiles and lengths differ in size");
  if (!(K0 >= 0.0) || !(mu >= 0.0)) throw DomainError("nested_sets: K0 and mu must be nonnegative");
  const double mt = mu_tilde.value_or(mu);
  if (!(mt >= 0.0) || mt > mu) throw DomainError("nested_sets: need 0 <= mu_tilde <= mu");
  for (std::size_t i = 1; i < nt; ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("nested_sets: times must be increasing");
    if (lengths_L[i] > lengths_L[i - 1]) throw DomainError("nested_sets: lengths must be nonincreasing");
  }
  NestedFamily f;
  f.times.assign(times.begin(), times.end());
  f.lengths_L.assign(lengths_L.begin(), lengths_L.end());
  f.K0 = K0;
  f.mu = mu;
  f.mu_tilde = mt;
  if (nt == 0) return f;
  f.grid = profiles[0].grid;
  const std::size_t n = f.grid.size();
  for (const auto& p : profiles) {
    if (p.grid != f.grid || p.values.size() != n) throw DomainError("nested_sets: profiles must share one grid");
  }

  auto member = [&](std::size_t i, std::size_t j, double m) {
    const double thr = K0 * lengths_L[i] + m;
    return profiles[i].values[j] > thr * thr;
  };
  f.membership.assign(nt, std::vector<bool>(n));
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t j = 0; j < n; ++j) f.membership[i][j] = member(i, j, mu);

  for (std::size_t i1 = 0; i1 < nt; ++i1) {
    for (std::size_t i2 = i1; i2 < nt; ++i2) {
      ++f.pairs_checked;
      for (std::size_t j = 0; j < n; ++j) {
        if (f.membership[i1][j] && !member(i2, j, mt)) {
          if (f.violations.size() < kMaxRecordedViolations) f.violations.push_back({f.grid[j], i1, i2});
          ++f.violation_count;
        }
      }
    }
  }

  const double thr0 = K0 * lengths_L[0] + mu;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(profiles[0].values[j] >= thr0 * thr0)) continue;
    for (std::size_t i = 0; i < nt; ++i) {
      if (!(profiles[i].values[j] >= mu * mu)) ++f.thick_claim_violations;
    }
  }
  return f;
}

SurfaceDescriptor descriptor_from_json(std::string_view text) {
  const auto j = detail::parse_json(text);
  if (!j.is_object()) throw ParseError("surface descriptor must be a JSON object");
  SurfaceDescriptor d;
  d.genus = detail::field<int>(j, "genus", "descriptor");
  const auto collars = j.value("collars", nlohmann::json::array());
  if (!collars.is_array()) throw ParseError("descriptor: \"collars\" must be an array");
  for (const auto& c : collars) {
    const double ell = detail::field<double>(c, "ell", "collar");
    try {
      d.collars.emplace_back(ell);
    } catch (const DomainError& e) {
      throw ParseError(std::string("collar: ") + e.what());
    }
  }
  const auto comps = detail::field<nlohmann::json>(j, "components", "descriptor");
  if (!comps.is_array()) throw ParseError("descriptor: \"components\" must be an array");
  for (const auto& c : comps) {
    DescriptorComponent dc;
    dc.genus = detail::field<int>(c, "genus", "component");
    dc.ends = c.value("ends", std::vector<int>{});
    d.components.push_back(std::move(dc));
  }
  return d;
}

std::string descriptor_to_json(const SurfaceDescriptor& d) {
  nlohmann::ordered_json j;
  j["genus"] = d.genus;
  j["collars"] = nlohmann::ordered_json::array();
  for (const auto& c : d.collars) j["collars"].push_back({{"ell", c.ell()}});
  j["components"] = nlohmann::ordered_json::array();
  for (const auto& c : d.components) j["components"].push_back({{"genus", c.genus}, {"ends", c.ends}});
  return j.dump(2);
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Component owning each collar end, or -1 if unused; records misuse.
std::vector<int> end_owners(const SurfaceDescriptor& d, std::vector<std::string>& problems) {
  const int ends = 2 * static_cast<int>(d.collars.size());
  std::vector<int> owner(ends, -1);
  for (std::size_t i = 0; i < d.components.size(); ++i) {
    for (int e : d.components[i].ends) {
      if (e < 0 || e >= ends) {
        problems.push_back("component " + std::to_string(i) + " references unknown collar end " + std::to_string(e));
      } else if (owner[e] != -1) {
        problems.push_back("collar end " + std::to_string(e) + " is used more than once");
      } else {
        owner[e] = static_cast<int>(i);
      }
    }
  }
  for (int e = 0; e < ends; ++e) {
    if (owner[e] == -1) problems.push_back("collar end " + std::to_string(e) + " is not attached to any component");
  }
  return owner;
}

}  // namespace

DescriptorReport descriptor_validate(const SurfaceDescriptor& d) {
  DescriptorReport r;
  r.kappa = static_cast<int>(d.collars.size());
  r.m = static_cast<int>(d.components.size());
  auto& v = r.violations;
  const int g = d.genus;
  if (g < 2) v.push_back("genus must be at least 2");
  if (r.kappa > 3 * (g - 1)) v.push_back("kappa = " + std::to_string(r.kappa) + " exceeds 3(genus-1) = " + std::to_string(3 * (g - 1)));
  if (r.m < 1 || r.m > 2 * (g - 1))
    v.push_back("m = " + std::to_string(r.m) + " outside [1, 2(genus-1)] = [1, " + std::to_string(2 * (g - 1)) + "]");
  if (r.kappa < r.m - 1) v.push_back("kappa = " + std::to_string(r.kappa) + " < m - 1: complement cannot be connected");

  std::vector<std::string> structural;
  const auto owner = end_owners(d, structural);
  v.insert(v.end(), structural.begin(), structural.end());

  for (std::size_t i = 0; i < d.components.size(); ++i) {
    const auto& c = d.components[i];
    const int chi = 2 - 2 * c.genus - static_cast<int>(c.ends.size());
    r.euler_sum += chi;
    if (c.genus < 0) v.push_back("component " + std::to_string(i) + " has negative genus");
    if (chi > -1) v.push_back("component " + std::to_string(i) + " has Euler characteristic " + std::to_string(chi) + " > -1");
  }
  if (r.euler_sum != 2 - 2 * g)
    v.push_back("Euler characteristic sum " + std::to_string(r.euler_sum) + " != 2 - 2 genus = " + std::to_string(2 - 2 * g));

  if (r.m >= 1 && structural.empty()) {
    DisjointSets ds(d.components.size());
    for (int k = 0; k < r.kappa; ++k) ds.unite(owner[2 * k], owner[2 * k + 1]);
    const int root = ds.find(0);
    for (int i = 1; i < r.m; ++i) {
      if (ds.find(i) != root) {
        v.push_back("the collars do not connect all components");
        break;
      }
    }
  }
  return r;
}

LimitTopology limit_decomposition(const SurfaceDescriptor& d, std::span<const int> pinched) {
  std::vector<std::string> problems;
  const auto owner = end_owners(d, problems);
  if (!problems.empty()) throw StructuralError("inconsistent descriptor: " + problems.front());
  if (d.components.empty()) throw StructuralError("inconsistent descriptor: no components");
  const int kappa = static_cast<int>(d.collars.size());
  std::vector<bool> is_pinched(kappa, false);
  for (int k : pinched) {
    if (k < 0 || k >= kappa) throw StructuralError("pinched collar index " + std::to_string(k) + " out of range");
    if (is_pinched[k]) throw StructuralError("pinched collar " + std::to_string(k) + " listed twice");
    is_pinched[k] = true;
  }

  DisjointSets ds(d.components.size());
  for (int k = 0; k < kappa; ++k)
    if (!is_pinched[k]) ds.unite(owner[2 * k], owner[2 * k + 1]);

  LimitTopology t;
  std::vector<int> group_of(d.components.size(), -1);
  std::vector<int> chi;
  for (std::size_t i = 0; i < d.components.size(); ++i) {
    const int root = ds.find(static_cast<int>(i));
    if (group_of[root] == -1) {
      group_of[root] = static_cast<int>(t.components.size());
      t.components.emplace_back();
      chi.push_back(0);
    }
    const int gi = group_of[root];
    t.components[gi].members.push_back(static_cast<int>(i));
    chi[gi] += 2 - 2 * d.components[i].genus - static_cast<int>(d.components[i].ends.size());
  }

  std::vector<std::vector<int>> new_ends(t.components.size());
  int next_collar = 0;
  for (int k = 0; k < kappa; ++k) {
    if (!is_pinched[k]) continue;
    for (int side = 0; side < 2; ++side) {
      const int gi = group_of[ds.find(owner[2 * k + side])];
      ++t.components[gi].punctures;
      new_ends[gi].push_back(2 * next_collar + side);
    }
    ++next_collar;
    t.refined.collars.push_back(d.collars[k]);
  }

  for (std::size_t gi = 0; gi < t.components.size(); ++gi) {
    auto& c = t.components[gi];
    // Glued collars are annuli attached along circles, so chi of the group
    // is the sum over its members and equals 2 - 2 g - punctures.
    const int two_g = 2 - chi[gi] - c.punctures;
    if (two_g < 0 || two_g % 2 != 0) throw StructuralError("inconsistent descriptor: non-integral limit genus");
    c.genus = two_g / 2;
    t.total_punctures += c.punctures;
    t.refined.components.push_back({c.genus, new_ends[gi]});
  }
  t.refined.genus = d.genus;
  return t;
}

}  // namespace pinchlab
