#include "fitzflow/descriptors.hpp"

#include <cctype>

namespace fitzflow {

namespace {

struct Parser {
  const std::string& s;
  size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("descriptor@" + std::to_string(pos),
                      msg + " in '" + s + "'");
  }

  std::string ident() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum((unsigned char)s[pos]) || s[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected identifier");
    return s.substr(start, pos - start);
  }

  std::string scalar() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && s[pos] != ',' && s[pos] != ')' && s[pos] != '(' &&
           s[pos] != '=' && !std::isspace((unsigned char)s[pos]))
      ++pos;
    if (pos == start) fail("expected value");
    return s.substr(start, pos - start);
  }

  DescNode node() {
    DescNode n;
    n.tag = ident();
    skip_ws();
    if (pos < s.size() && s[pos] == '(') {
      ++pos;
      skip_ws();
      if (pos < s.size() && s[pos] == ')') {
        ++pos;
        return n;
      }
      while (true) {
        skip_ws();
        size_t mark = pos;
        // lookahead: identifier followed by '(' → nested; '=' → kwarg
        bool is_ident = pos < s.size() && (std::isalpha((unsigned char)s[pos]) ||
                                           s[pos] == '_');
        if (is_ident) {
          std::string name = ident();
          skip_ws();
          if (pos < s.size() && s[pos] == '(') {
            pos = mark;
            n.children.push_back(node());
          } else if (pos < s.size() && s[pos] == '=') {
            ++pos;
            n.kwargs[name] = scalar();
          } else {
            n.args.push_back(name);
          }
        } else {
          n.args.push_back(scalar());
        }
        skip_ws();
        if (pos < s.size() && s[pos] == ',') {
          ++pos;
          continue;
        }
        if (pos < s.size() && s[pos] == ')') {
          ++pos;
          break;
        }
        fail("expected ',' or ')'");
      }
    }
    return n;
  }
};

double to_num(const std::string& where, const std::string& v) {
  try {
    size_t p = 0;
    double x = std::stod(v, &p);
    if (p != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(where, "expected a number, got '" + v + "'");
  }
}

[[noreturn]] void unknown(const std::string& kind, const std::string& tag) {
  throw ConfigError(kind, "unknown " + kind + " tag '" + tag + "'");
}

}  // namespace

double DescNode::num(size_t i) const {
  if (i >= args.size())
    throw ConfigError(tag, "missing positional argument " + std::to_string(i));
  return to_num(tag, args[i]);
}

double DescNode::knum(const std::string& key, double fallback) const {
  auto it = kwargs.find(key);
  return it == kwargs.end() ? fallback : to_num(tag + "." + key, it->second);
}

int DescNode::kint(const std::string& key, int fallback) const {
  return (int)knum(key, fallback);
}

DescNode parse_descriptor(const std::string& text) {
  Parser p{text};
  DescNode n = p.node();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing characters");
  return n;
}

ConvexFn make_convex(const DescNode& n) {
  if (n.tag == "quadratic")
    return ConvexFn::quadratic(n.num(0), n.kint("dim", 1));
  if (n.tag == "halfnormsq") return ConvexFn::half_norm_sq(n.kint("dim", 1));
  if (n.tag == "abspower")
    return ConvexFn::abs_power(n.num(0), n.kint("dim", 1));
  if (n.tag == "indicator_ball")
    return ConvexFn::indicator_ball(n.num(0), n.kint("dim", 1));
  if (n.tag == "indicator_point") {
    Vec c(n.args.size());
    for (size_t i = 0; i < n.args.size(); ++i) c[i] = n.num(i);
    return ConvexFn::indicator_point(c);
  }
  if (n.tag == "linear") {
    Vec a(n.args.size());
    for (size_t i = 0; i < n.args.size(); ++i) a[i] = n.num(i);
    return ConvexFn::linear(a, n.knum("off", 0.0));
  }
  if (n.tag == "plap")
    return ConvexFn::plap_potential(n.knum("p", 2.0), n.kint("n", 8));
  if (n.tag == "scaled") {
    if (n.children.size() != 1)
      throw ConfigError(n.tag, "needs one nested potential");
    return ConvexFn::scaled(make_convex(n.children[0]), n.num(0));
  }
  unknown("potential", n.tag);
}

ConvexFn make_convex(const std::string& d) {
  return make_convex(parse_descriptor(d));
}

MonotoneOp make_operator(const DescNode& n) {
  if (n.tag == "identity")
    return MonotoneOp::identity(n.args.empty() ? 1 : (int)n.num(0));
  if (n.tag == "linear")
    return MonotoneOp::linear_scalar(n.num(0),
                                     n.args.size() > 1 ? (int)n.num(1) : 1);
  if (n.tag == "sign1d") return MonotoneOp::sign1d();
  if (n.tag == "only_at_zero")
    return MonotoneOp::only_at_zero(n.args.empty() ? 1 : (int)n.num(0));
  if (n.tag == "subdiff") {
    if (n.children.size() != 1)
      throw ConfigError(n.tag, "needs one nested potential");
    return MonotoneOp::subdiff(make_convex(n.children[0]));
  }
  if (n.tag == "plaplacian1d")
    return MonotoneOp::plaplacian_1d(n.knum("p", 2.0), n.kint("n", 8));
  if (n.tag == "scaled") {
    if (n.children.size() != 1)
      throw ConfigError(n.tag, "needs one nested operator");
    return MonotoneOp::scaled(make_operator(n.children[0]), n.num(0));
  }
  unknown("operator", n.tag);
}

MonotoneOp make_operator(const std::string& d) {
  return make_operator(parse_descriptor(d));
}

RepFn make_rep(const DescNode& n) {
  if (n.tag == "fb") return RepFn::fb(n.num(0), n.kint("dim", 1));
  if (n.tag == "fitzidentity")
    return RepFn::fitz_identity(n.args.empty() ? 1 : (int)n.num(0));
  if (n.tag == "fenchel") {
    if (n.children.size() != 1)
      throw ConfigError(n.tag, "needs one nested potential");
    return RepFn::fenchel_of(make_convex(n.children[0]));
  }
  if (n.tag == "fitzgraph") {
    if (n.children.size() != 1)
      throw ConfigError(n.tag, "needs one nested operator");
    MonotoneOp op = make_operator(n.children[0]);
    double lo = n.knum("lo", -2.0), hi = n.knum("hi", 2.0);
    int density = n.kint("density", 41);
    Box box{Vec::Constant(op.dim(), lo), Vec::Constant(op.dim(), hi)};
    return RepFn::fitzpatrick_of(op.graph_sample(box, density));
  }
  if (n.tag == "linearrep") {
    int dim = n.args.size() > 1 ? (int)n.num(1) : 1;
    return RepFn::linear_op_rep(n.num(0) * Mat::Identity(dim, dim));
  }
  if (n.tag == "infconv") {
    if (n.children.size() != 1)
      throw ConfigError(n.tag, "needs one nested representative");
    RepFn g1 = make_rep(n.children[0]);
    return inf_convolution(g1, MonotoneOp::linear_scalar(n.num(0), g1.dim()));
  }
  unknown("representative", n.tag);
}

RepFn make_rep(const std::string& d) { return make_rep(parse_descriptor(d)); }

}  // namespace fitzflow
