#pragma once

// Catalog spec strings: "uniform:h=1", "laplace:b=2", "gaussian:sigma=1",
// "fejer:T=0.7", "bernoulli", "product:uniform:h=1,uniform:h=1".
// Numbers are plain decimals or sqrt(v).

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "llt/distributions.hpp"
#include "llt/errors.hpp"

namespace llt {

class SpecError : public InvalidParameter {
 public:
  SpecError(const std::string& what, std::string token_, std::size_t position_)
      : InvalidParameter(what + " (at position " + std::to_string(position_) + ")"),
        token(std::move(token_)),
        position(position_) {}
  std::string token;
  std::size_t position;
};

namespace detail {

inline double parse_spec_number(std::string_view text, std::size_t pos) {
  std::string_view body = text;
  bool root = false;
  if (body.starts_with("sqrt(") && body.ends_with(")")) {
    body = body.substr(5, body.size() - 6);
    root = true;
  }
  double v = 0.0;
  const auto [end, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
  if (ec != std::errc() || end != body.data() + body.size() || !std::isfinite(v))
    throw SpecError("invalid number: " + std::string(text), std::string(text), pos);
  if (root) {
    if (v < 0) throw SpecError("invalid number: " + std::string(text), std::string(text), pos);
    v = std::sqrt(v);
  }
  return v;
}

struct CatalogEntry {
  std::string_view family;
  std::string_view param;
  Distribution (*make)(double);
};

inline constexpr CatalogEntry kCatalog[] = {
    {"uniform", "h", make_uniform},
    {"laplace", "b", make_laplace},
    {"gaussian", "sigma", make_gaussian},
    {"fejer", "T", make_fejer},
};

/// One non-product entry starting at `pos` in the full text.
inline Distribution parse_component(std::string_view item, std::size_t pos) {
  const auto colon = item.find(':');
  const std::string_view family = item.substr(0, colon);
  if (family == "bernoulli") {
    if (colon != std::string_view::npos)
      throw SpecError("bernoulli takes no parameters: " + std::string(item), std::string(item), pos);
    return Distribution({bernoulli_component()});
  }
  for (const auto& e : kCatalog) {
    if (family != e.family) continue;
    if (colon == std::string_view::npos)
      throw SpecError("missing parameter " + std::string(e.param) + " for " + std::string(family), std::string(family), pos);
    const std::string_view kv = item.substr(colon + 1);
    const std::size_t kv_pos = pos + colon + 1;
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos || kv.substr(0, eq) != e.param)
      throw SpecError("unknown parameter: " + std::string(kv.substr(0, eq)), std::string(kv.substr(0, eq)), kv_pos);
    return e.make(parse_spec_number(kv.substr(eq + 1), kv_pos + eq + 1));
  }
  throw SpecError("unknown distribution: " + std::string(family), std::string(family), pos);
}

}  // namespace detail

/// Source (or raw law) from a catalog spec.
inline Distribution parse_spec(std::string_view text) {
  constexpr std::string_view kProduct = "product:";
  if (text.empty()) throw SpecError("empty distribution spec", "", 0);
  if (!text.starts_with(kProduct)) return detail::parse_component(text, 0);
  std::vector<Distribution> parts;
  std::size_t pos = kProduct.size();
  while (true) {
    const auto comma = text.find(',', pos);
    const std::string_view item = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
    if (item.empty()) throw SpecError("empty product factor", "", pos);
    parts.push_back(detail::parse_component(item, pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (parts.size() < 2) throw SpecError("product needs at least two factors", std::string(text), 0);
  return product(parts);
}

/// Noise from a catalog spec; "bernoulli" is widened to the cube {-1, 1}^dim.
inline NoiseDistribution parse_noise_spec(std::string_view text, int dim = 1) {
  if (text == "bernoulli") return bernoulli_noise(dim);
  NoiseDistribution noise(parse_spec(text));
  if (noise.dim() != dim) throw InvalidParameter("noise dimension " + std::to_string(noise.dim()) +
                                                 " does not match source dimension " + std::to_string(dim));
  return noise;
}

}  // namespace llt
