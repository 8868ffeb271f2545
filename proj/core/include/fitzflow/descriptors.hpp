#pragma once

#include "fitzflow/config.hpp"
#include "fitzflow/rep_fn.hpp"

namespace fitzflow {

/// Parsed `tag(positional, key=value, nested(...))` descriptor.
struct DescNode {
  std::string tag;
  std::vector<std::string> args;               // positional scalars
  std::map<std::string, std::string> kwargs;   // key=value scalars
  std::vector<DescNode> children;              // nested descriptors

  double num(size_t i) const;
  double knum(const std::string& key, double fallback) const;
  int kint(const std::string& key, int fallback) const;
};

/// Parses a descriptor; malformed input raises ConfigError naming the spot.
DescNode parse_descriptor(const std::string& text);

/// Convex potentials: quadratic(b), halfnormsq, abspower(p),
/// indicator_ball(r), indicator_point(c), linear(a), plap(p=…, n=…),
/// scaled(<f>, s).
ConvexFn make_convex(const std::string& descriptor);
ConvexFn make_convex(const DescNode& node);

/// Operators: identity(dim?), linear(lambda, dim?), sign1d, only_at_zero,
/// subdiff(<convex>), plaplacian1d(p=…, n=…), scaled(<op>, c).
MonotoneOp make_operator(const std::string& descriptor);
MonotoneOp make_operator(const DescNode& node);

/// Representatives: fb(b, dim?), fitzidentity(dim?), fenchel(<convex>),
/// fitzgraph(<op>, lo=…, hi=…, density=…), linearrep(lambda, dim?),
/// infconv(<rep>, lambda).
RepFn make_rep(const std::string& descriptor);
RepFn make_rep(const DescNode& node);

}  // namespace fitzflow
