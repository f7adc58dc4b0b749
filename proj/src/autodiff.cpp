#include "mugen/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace mugen::ad {

double Var::value() const { return tape->value(*this); }

Var Tape::push(double value, int parents, std::size_t p0, double d0, std::size_t p1, double d1) {
  nodes_.push_back({value, {p0, p1}, {d0, d1}, parents});
  return {this, nodes_.size() - 1};
}

Var Tape::variable(double value) { return push(value, 0); }

Var Tape::add(Var a, Var b) { return push(value(a) + value(b), 2, a.id, 1.0, b.id, 1.0); }
Var Tape::sub(Var a, Var b) { return push(value(a) - value(b), 2, a.id, 1.0, b.id, -1.0); }
Var Tape::mul(Var a, Var b) { return push(value(a) * value(b), 2, a.id, value(b), b.id, value(a)); }
Var Tape::div(Var a, Var b) {
  const double vb = value(b);
  const double q = value(a) / vb;
  return push(q, 2, a.id, 1.0 / vb, b.id, -q / vb);
}
Var Tape::neg(Var a) { return push(-value(a), 1, a.id, -1.0); }
Var Tape::exp(Var a) {
  const double e = std::exp(value(a));
  return push(e, 1, a.id, e);
}
Var Tape::log(Var a) {
  const double va = value(a);
  return push(std::log(va), 1, a.id, 1.0 / va);
}
Var Tape::max(Var a, Var b) {
  const bool pick_a = value(a) >= value(b);
  return push(pick_a ? value(a) : value(b), 2, a.id, pick_a ? 1.0 : 0.0, b.id, pick_a ? 0.0 : 1.0);
}
Var Tape::relu(Var a) {
  const double va = value(a);
  return push(va > 0.0 ? va : 0.0, 1, a.id, va > 0.0 ? 1.0 : 0.0);
}
Var Tape::stop_gradient(Var a) { return push(value(a), 0); }

std::vector<double> Tape::gradient(Var output) const {
  if (output.tape != this || output.id >= nodes_.size()) throw std::invalid_argument("variable is not on this tape");
  std::vector<double> adj(nodes_.size(), 0.0);
  adj[output.id] = 1.0;
  for (std::size_t i = output.id + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (adj[i] == 0.0) continue;
    for (int p = 0; p < n.parents; ++p) adj[n.parent[p]] += adj[i] * n.partial[p];
  }
  return adj;
}

}  // namespace mugen::ad
