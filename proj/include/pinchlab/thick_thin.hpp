#pragma once

// Thick/thin sets inside a collar, the separation estimate between a
// beta-thick and an epsilon-thin part, nesting of the sets
//   M^mu(t) = { inj_{g(t)} > (K0 L(t) + mu)^2 },
// and the combinatorics of pinching a family of collars on a closed surface.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pinchlab/collar.hpp"

namespace pinchlab {

struct ThickThinQuery {
  std::optional<double> delta;
  std::optional<double> beta;
  std::optional<double> epsilon;
  std::optional<double> Q;
  // Throws DomainError for non-positive entries or epsilon >= beta.
  void validate() const;
};

struct Interval {
  double lo;
  double hi;
};

// Disjoint, sorted, closed s-intervals inside [-X, X].
struct SRegion {
  std::vector<Interval> intervals;
  bool empty() const noexcept { return intervals.empty(); }
  bool contains(double s) const noexcept;
  double measure() const noexcept;
};

// { s : inj(s) < delta }, by bisection on the monotone profile.
SRegion thin_interval(const CollarParams& c, double delta);
// { s : inj(s) >= delta }.
SRegion thick_region(const CollarParams& c, double delta);

// Largest admissible thin threshold (times 1 - 1e-6) whose thin part stays
// more than Q away from the beta-thick part.
double epsilon_for_separation(double beta, double Q);

struct SeparationResult {
  bool thick_empty = false;
  bool thin_empty = false;
  double distance = 0.0;          // meaningful only when neither region is empty
  double proof_lower_bound = 0.0;  // -log sinh eps + log(sinh beta / (1 + sqrt 2))
  bool empty() const noexcept { return thick_empty || thin_empty; }
};

SeparationResult separation_check(const CollarParams& c, double beta, double epsilon);

struct NestingViolation {
  double s;         // grid coordinate of the offending point
  std::size_t t1;   // time indices, t1 <= t2
  std::size_t t2;
};

struct NestedFamily {
  std::vector<double> times;
  std::vector<double> lengths_L;
  double K0 = 0.0;
  double mu = 0.0;
  double mu_tilde = 0.0;
  std::vector<double> grid;
  // membership[i][j]: grid point j lies in M^mu(times[i]).
  std::vector<std::vector<bool>> membership;
  std::size_t pairs_checked = 0;
  std::size_t violation_count = 0;
  std::vector<NestingViolation> violations;  // first few offenders
  // Points of the (K0 L(0) + mu)^2-thick part at time 0 that leave the
  // mu^2-thick part later.
  std::size_t thick_claim_violations = 0;
  bool passed() const noexcept { return violation_count == 0 && thick_claim_violations == 0; }
};

// profiles[i] is the inj profile at times[i]; all share one grid.
NestedFamily nested_sets(std::span<const double> times, std::span<const InjProfile> profiles,
                         std::span<const double> lengths_L, double K0, double mu,
                         std::optional<double> mu_tilde = std::nullopt);

// Closed surface of genus gamma cut along a family of collars.  End id e
// refers to side e % 2 of collar e / 2.
struct DescriptorComponent {
  int genus = 0;
  std::vector<int> ends;
};

struct SurfaceDescriptor {
  int genus = 2;
  std::vector<CollarParams> collars;
  std::vector<DescriptorComponent> components;
};

SurfaceDescriptor descriptor_from_json(std::string_view text);
std::string descriptor_to_json(const SurfaceDescriptor& d);

struct DescriptorReport {
  int kappa = 0;
  int m = 0;
  int euler_sum = 0;
  std::vector<std::string> violations;
  bool passed() const noexcept { return violations.empty(); }
};

DescriptorReport descriptor_validate(const SurfaceDescriptor& d);

struct LimitComponent {
  int genus = 0;
  int punctures = 0;
  std::vector<int> members;  // indices into SurfaceDescriptor::components
};

struct LimitTopology {
  std::vector<LimitComponent> components;
  int total_punctures = 0;
  // The same surface described with only the pinched collars cut.
  SurfaceDescriptor refined;
};

// Throws StructuralError when the descriptor is inconsistent.
LimitTopology limit_decomposition(const SurfaceDescriptor& d, std::span<const int> pinched);

struct NamedDescriptor {
  const char* name;
  const char* json;
  int kappa;  // number of collars; the limit has 2 kappa punctures
};

// Enumerated genus-2 configurations used by the bookkeeping suite.
const std::vector<NamedDescriptor>& genus2_valid_catalog();
const std::vector<NamedDescriptor>& genus2_invalid_catalog();

}  // namespace pinchlab
