#include "phcollapse/generators.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "phcollapse/error.hpp"
#include "text.hpp"

namespace phc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct TokenParts {
  std::string family;
  std::vector<std::pair<std::string, std::string>> params;
};

TokenParts split_token(std::string_view token) {
  TokenParts out;
  auto fields = detail::split(token, ':');
  if (fields.empty() || detail::trim(fields[0]).empty()) throw parse_error("empty generator token");
  out.family = std::string(detail::trim(fields[0]));
  for (std::size_t i = 1; i < fields.size(); ++i) {
    auto f = detail::trim(fields[i]);
    auto eq = f.find('=');
    if (eq == std::string_view::npos) throw parse_error("expected key=value in token '" + std::string(token) + "'");
    out.params.emplace_back(std::string(detail::trim(f.substr(0, eq))), std::string(detail::trim(f.substr(eq + 1))));
  }
  return out;
}

using Normal = std::normal_distribution<double>;

void fill_gaussian(std::span<double> out, double scale, Normal& normal, std::mt19937_64& rng) {
  for (double& x : out) x = scale * normal(rng);
}

void uniform_on_sphere(std::span<double> out, Normal& normal, std::mt19937_64& rng) {
  double r2 = 0.0;
  do {
    r2 = 0.0;
    for (double& x : out) {
      x = normal(rng);
      r2 += x * x;
    }
  } while (r2 == 0.0);
  const double r = std::sqrt(r2);
  for (double& x : out) x /= r;
}

void check_size(std::size_t n, std::size_t d) {
  if (n == 0 || d == 0) throw parameter_error("sampling needs n >= 1 and d >= 1");
}

}  // namespace

// ---------------------------------------------------------------------------

SeedSequence SeedSequence::child(std::uint64_t index) const {
  auto p = path_;
  p.push_back(index);
  return SeedSequence(master_, std::move(p));
}

std::mt19937_64 SeedSequence::engine() const {
  std::uint64_t h = splitmix64(master_);
  for (std::uint64_t p : path_) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  const std::uint64_t h2 = splitmix64(h ^ 0xa0761d6478bd642fULL);
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(h2), static_cast<std::uint32_t>(h2 >> 32)};
  return std::mt19937_64(seq);
}

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Null families

void validate(const NullSpec& spec) {
  switch (spec.family) {
    case NullFamily::elliptical_gaussian:
      if (!(spec.eta > 0.0 && spec.eta <= 1.0)) throw parameter_error("elliptical_gaussian needs eta in (0, 1]");
      break;
    case NullFamily::noisy_sphere:
      if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) throw parameter_error("noisy_sphere needs sigma >= 0");
      break;
    default:
      break;
  }
}

std::string family_name(NullFamily family) {
  switch (family) {
    case NullFamily::standard_gaussian: return "standard_gaussian";
    case NullFamily::elliptical_gaussian: return "elliptical_gaussian";
    case NullFamily::noisy_sphere: return "noisy_sphere";
    case NullFamily::point_mass: return "point_mass";
  }
  return "?";
}

std::string family_params(const NullSpec& spec) {
  switch (spec.family) {
    case NullFamily::elliptical_gaussian: return "eta=" + detail::format_short(spec.eta);
    case NullFamily::noisy_sphere: return "sigma=" + detail::format_short(spec.sigma);
    default: return {};
  }
}

std::string to_string(const NullSpec& spec) {
  auto params = family_params(spec);
  return params.empty() ? family_name(spec.family) : family_name(spec.family) + ":" + params;
}

NullSpec parse_null_spec(std::string_view token) {
  auto parts = split_token(token);
  NullSpec spec;
  if (parts.family == "standard_gaussian") spec.family = NullFamily::standard_gaussian;
  else if (parts.family == "elliptical_gaussian") spec.family = NullFamily::elliptical_gaussian;
  else if (parts.family == "noisy_sphere") spec.family = NullFamily::noisy_sphere;
  else if (parts.family == "point_mass") spec.family = NullFamily::point_mass;
  else throw parse_error("unknown null family '" + parts.family + "'");

  for (const auto& [key, value] : parts.params) {
    if (key == "eta" && spec.family == NullFamily::elliptical_gaussian) spec.eta = detail::parse_double(value);
    else if (key == "sigma" && spec.family == NullFamily::noisy_sphere) spec.sigma = detail::parse_double(value);
    else throw parse_error("parameter '" + key + "' not valid for " + parts.family);
  }
  validate(spec);
  return spec;
}

std::vector<NullSpec> default_null_suite() {
  std::vector<NullSpec> suite{{NullFamily::standard_gaussian, 1.0, 0.0}};
  for (double eta : {0.05, 0.1, 0.2, 0.5, 1.0}) suite.push_back({NullFamily::elliptical_gaussian, eta, 0.0});
  for (double sigma : {0.1, 0.3, 0.5}) suite.push_back({NullFamily::noisy_sphere, 1.0, sigma});
  return suite;
}

PointCloud sample_null(const NullSpec& spec, std::size_t n, std::size_t d, const SeedSequence& seed) {
  check_size(n, d);
  validate(spec);
  PointCloud cloud(n, d);
  auto rng = seed.engine();
  std::normal_distribution<double> normal(0.0, 1.0);

  switch (spec.family) {
    case NullFamily::standard_gaussian:
      for (std::size_t i = 0; i < n; ++i) fill_gaussian(cloud.point(i), 1.0, normal, rng);
      break;
    case NullFamily::elliptical_gaussian: {
      std::vector<double> sd(d, 1.0);
      for (std::size_t j = 0; j < d && d > 1; ++j)
        sd[j] = std::sqrt(std::pow(spec.eta, static_cast<double>(j) / static_cast<double>(d - 1)));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) cloud(i, j) = sd[j] * normal(rng);
      break;
    }
    case NullFamily::noisy_sphere:
      for (std::size_t i = 0; i < n; ++i) {
        auto p = cloud.point(i);
        uniform_on_sphere(p, normal, rng);
        if (spec.sigma > 0.0)
          for (double& x : p) x += spec.sigma * normal(rng);
      }
      break;
    case NullFamily::point_mass:
      break;
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// Alternatives

Mechanism mechanism_of(AltFamily family) {
  switch (family) {
    case AltFamily::k_plane:
    case AltFamily::spiked_gaussian: return Mechanism::A;
    case AltFamily::swiss_roll:
    case AltFamily::torus:
    case AltFamily::paraboloid: return Mechanism::B;
    default: return Mechanism::C;
  }
}

Mechanism AltSpec::mechanism() const noexcept { return mechanism_of(family); }

char mechanism_label(Mechanism m) { return m == Mechanism::A ? 'A' : m == Mechanism::B ? 'B' : 'C'; }

std::string family_name(AltFamily family) {
  switch (family) {
    case AltFamily::k_plane: return "k_plane";
    case AltFamily::spiked_gaussian: return "spiked_gaussian";
    case AltFamily::swiss_roll: return "swiss_roll";
    case AltFamily::torus: return "torus";
    case AltFamily::paraboloid: return "paraboloid";
    case AltFamily::contaminated_k_cube: return "contaminated_k_cube";
    case AltFamily::contaminated_k_plane: return "contaminated_k_plane";
    case AltFamily::contaminated_sphere: return "contaminated_sphere";
  }
  return "?";
}

std::string to_string(const AltSpec& spec, bool with_eps) {
  std::string s = family_name(spec.family);
  if (with_eps) s += ":eps=" + detail::format_short(spec.epsilon);
  if (spec.k) s += ":k=" + std::to_string(*spec.k);
  if (spec.mechanism() == Mechanism::C && spec.rho != 0.1) s += ":rho=" + detail::format_short(spec.rho);
  return s;
}

AltToken parse_alt_spec(std::string_view token) {
  static const AltFamily all[] = {AltFamily::k_plane,          AltFamily::spiked_gaussian,     AltFamily::swiss_roll,
                                  AltFamily::torus,            AltFamily::paraboloid,          AltFamily::contaminated_k_cube,
                                  AltFamily::contaminated_k_plane, AltFamily::contaminated_sphere};
  auto parts = split_token(token);
  AltToken out;
  bool found = false;
  for (AltFamily f : all)
    if (family_name(f) == parts.family) {
      out.spec.family = f;
      found = true;
    }
  if (!found) throw parse_error("unknown alternative family '" + parts.family + "'");

  for (const auto& [key, value] : parts.params) {
    if (key == "eps") {
      out.spec.epsilon = detail::parse_double(value);
      out.eps_given = true;
    } else if (key == "k") {
      const double k = detail::parse_double(value);
      if (!(k >= 1.0) || k != std::floor(k)) throw parse_error("k must be a positive integer");
      out.spec.k = static_cast<std::size_t>(k);
    } else if (key == "rho") {
      out.spec.rho = detail::parse_double(value);
    } else {
      throw parse_error("parameter '" + key + "' not valid for " + parts.family);
    }
  }
  if (!(out.spec.epsilon >= 0.0)) throw parameter_error("eps must be >= 0");
  if (!(out.spec.rho >= 0.0 && out.spec.rho < 1.0)) throw parameter_error("rho must be in [0, 1)");
  return out;
}

std::vector<AltSpec> default_alternatives() {
  std::vector<AltSpec> out;
  for (AltFamily f : {AltFamily::k_plane, AltFamily::spiked_gaussian, AltFamily::swiss_roll, AltFamily::torus,
                      AltFamily::paraboloid, AltFamily::contaminated_k_cube, AltFamily::contaminated_k_plane,
                      AltFamily::contaminated_sphere})
  {
    AltSpec spec;
    spec.family = f;
    out.push_back(spec);
  }
  return out;
}

double off_support_scale(double epsilon) { return 1.0 / (1.0 + epsilon); }

PointCloud sample_alternative(const AltSpec& spec, std::size_t n, std::size_t d, const SeedSequence& seed) {
  check_size(n, d);
  if (!(spec.epsilon >= 0.0) || !std::isfinite(spec.epsilon)) throw parameter_error("epsilon must be finite and >= 0");
  if (!(spec.rho >= 0.0 && spec.rho < 1.0)) throw parameter_error("rho must be in [0, 1)");

  const bool curved = mechanism_of(spec.family) == Mechanism::B;
  if (curved && d < 3) throw parameter_error(family_name(spec.family) + " needs d >= 3");
  const std::size_t k = spec.k.value_or((d + 1) / 2);
  const bool uses_k = spec.family == AltFamily::k_plane || spec.family == AltFamily::contaminated_k_cube ||
                      spec.family == AltFamily::contaminated_k_plane;
  if (uses_k && (k == 0 || k >= d)) throw parameter_error(family_name(spec.family) + " needs 1 <= k < d");

  const double sigma_perp = off_support_scale(spec.epsilon);
  constexpr double pi = std::numbers::pi;

  PointCloud cloud(n, d);
  auto rng = seed.engine();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution outlier(spec.rho);

  // Points on a 3-dim embedded support; the remaining coordinates carry
  // Gaussian noise of scale sigma_perp.
  auto embedded = [&](std::span<double> p, double a, double b, double c) {
    p[0] = a;
    p[1] = b;
    p[2] = c;
    for (std::size_t j = 3; j < d; ++j) p[j] = sigma_perp * normal(rng);
  };
  // Gaussian in-plane law on the first kk axes, sigma_perp noise elsewhere.
  auto plane = [&](std::span<double> p, std::size_t kk) {
    for (std::size_t j = 0; j < d; ++j) p[j] = (j < kk ? 1.0 : sigma_perp) * normal(rng);
  };

  for (std::size_t i = 0; i < n; ++i) {
    auto p = cloud.point(i);
    switch (spec.family) {
      case AltFamily::k_plane:
        plane(p, k);
        break;
      case AltFamily::spiked_gaussian:
        plane(p, 1);
        break;
      case AltFamily::swiss_roll: {
        const double t = 1.5 * pi + 3.0 * pi * unit(rng);
        const double h = unit(rng);
        const double s = 4.5 * pi;
        embedded(p, t * std::cos(t) / s, t * std::sin(t) / s, h / s);
        break;
      }
      case AltFamily::torus: {
        constexpr double R = 1.0, r = 0.4;
        const double theta = 2.0 * pi * unit(rng);
        const double phi = 2.0 * pi * unit(rng);
        embedded(p, (R + r * std::cos(theta)) * std::cos(phi), (R + r * std::cos(theta)) * std::sin(phi),
                 r * std::sin(theta));
        break;
      }
      case AltFamily::paraboloid: {
        const double u1 = 2.0 * unit(rng) - 1.0;
        const double u2 = 2.0 * unit(rng) - 1.0;
        embedded(p, u1, u2, u1 * u1 + u2 * u2);
        break;
      }
      case AltFamily::contaminated_k_cube:
        if (outlier(rng)) {
          fill_gaussian(p, 2.0, normal, rng);
        } else {
          for (std::size_t j = 0; j < d; ++j) p[j] = j < k ? 2.0 * unit(rng) - 1.0 : sigma_perp * normal(rng);
        }
        break;
      case AltFamily::contaminated_k_plane:
        if (outlier(rng)) fill_gaussian(p, 2.0, normal, rng);
        else plane(p, k);
        break;
      case AltFamily::contaminated_sphere:
        if (outlier(rng)) {
          // uniform in the radius-2 ball
          uniform_on_sphere(p, normal, rng);
          const double radius = 2.0 * std::pow(unit(rng), 1.0 / static_cast<double>(d));
          for (double& x : p) x *= radius;
        } else {
          // radial noise, normal to the sphere
          uniform_on_sphere(p, normal, rng);
          const double radius = 1.0 + sigma_perp * normal(rng);
          for (double& x : p) x *= radius;
        }
        break;
    }
  }
  return cloud;
}

}  // namespace phc
