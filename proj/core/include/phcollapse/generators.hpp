#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "phcollapse/geometry.hpp"

namespace phc {

// ---------------------------------------------------------------------------
// Seeding
// ---------------------------------------------------------------------------

/// A master seed plus a derivation path. Streams for distinct paths are
/// derived by hashing, so they do not depend on execution order.
class SeedSequence {
public:
  explicit SeedSequence(std::uint64_t master_seed, std::vector<std::uint64_t> path = {})
      : master_(master_seed), path_(std::move(path)) {}

  /// Copy of this sequence with `index` appended to the path.
  SeedSequence child(std::uint64_t index) const;

  std::uint64_t master_seed() const noexcept { return master_; }
  const std::vector<std::uint64_t>& path() const noexcept { return path_; }

  std::mt19937_64 engine() const;

  friend bool operator==(const SeedSequence&, const SeedSequence&) = default;

private:
  std::uint64_t master_;
  std::vector<std::uint64_t> path_;
};

/// Stable 64-bit FNV-1a hash, used to turn labels into seed path elements.
std::uint64_t stable_hash(std::string_view text);

// ---------------------------------------------------------------------------
// Null families
// ---------------------------------------------------------------------------

enum class NullFamily {
  standard_gaussian,
  elliptical_gaussian,
  noisy_sphere,
  point_mass,  // every point at the origin; test fixture for degenerate statistics
};

struct NullSpec {
  NullFamily family = NullFamily::standard_gaussian;
  double eta = 1.0;    // elliptical only, in (0, 1]
  double sigma = 0.0;  // noisy sphere only, >= 0

  friend bool operator==(const NullSpec&, const NullSpec&) = default;
};

void validate(const NullSpec& spec);

/// `standard_gaussian`, `elliptical_gaussian:eta=0.1`, `noisy_sphere:sigma=0.3`, `point_mass`.
NullSpec parse_null_spec(std::string_view token);
std::string to_string(const NullSpec& spec);
std::string family_name(NullFamily family);
/// Parameter part of the token (`eta=0.1`), empty when the family has none.
std::string family_params(const NullSpec& spec);

/// The nine null classes of the calibration table.
std::vector<NullSpec> default_null_suite();

PointCloud sample_null(const NullSpec& spec, std::size_t n, std::size_t d, const SeedSequence& seed);

// ---------------------------------------------------------------------------
// Alternative (collapsed) families
// ---------------------------------------------------------------------------

enum class Mechanism { A, B, C };

enum class AltFamily {
  k_plane,
  spiked_gaussian,
  swiss_roll,
  torus,
  paraboloid,
  contaminated_k_cube,
  contaminated_k_plane,
  contaminated_sphere,
};

struct AltSpec {
  AltFamily family = AltFamily::k_plane;
  double epsilon = 0.0;
  std::optional<std::size_t> k;  // intrinsic dimension; defaults to ceil(d/2)
  double rho = 0.1;              // contamination fraction, mechanism C only

  Mechanism mechanism() const noexcept;
  friend bool operator==(const AltSpec&, const AltSpec&) = default;
};

/// Parsed `--alt` token. `eps_given` records whether the token fixed epsilon.
struct AltToken {
  AltSpec spec;
  bool eps_given = false;
};

/// `torus`, `torus:eps=1.5`, `contaminated_k_plane:rho=0.2:k=3`.
AltToken parse_alt_spec(std::string_view token);
/// Token without the epsilon component.
std::string to_string(const AltSpec& spec, bool with_eps = false);
std::string family_name(AltFamily family);
char mechanism_label(Mechanism m);
Mechanism mechanism_of(AltFamily family);

/// The eight alternative families of the power table.
std::vector<AltSpec> default_alternatives();

/// Off-support noise scale 1/(1+eps).
double off_support_scale(double epsilon);

PointCloud sample_alternative(const AltSpec& spec, std::size_t n, std::size_t d, const SeedSequence& seed);

}  // namespace phc
