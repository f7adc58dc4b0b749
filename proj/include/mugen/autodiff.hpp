#pragma once

#include <cstddef>
#include <vector>

namespace mugen::ad {

class Tape;

/// Handle to a scalar node on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;
  double value() const;
};

/// Scalar reverse-mode tape. Each node stores at most two parents with their
/// local partials; gradient() sweeps the nodes once in reverse.
class Tape {
 public:
  Var variable(double value);
  Var constant(double value) { return variable(value); }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var neg(Var a);
  Var exp(Var a);
  Var log(Var a);
  /// Subgradient picks `a` when a >= b.
  Var max(Var a, Var b);
  /// (x)^+ with zero slope at 0.
  Var relu(Var a);
  /// Identity forward, zero backward.
  Var stop_gradient(Var a);

  double value(Var v) const { return nodes_[v.id].value; }
  std::size_t size() const { return nodes_.size(); }

  /// Adjoint of every node with respect to `output`.
  std::vector<double> gradient(Var output) const;

 private:
  struct Node {
    double value;
    std::size_t parent[2];
    double partial[2];
    int parents;
  };
  Var push(double value, int parents, std::size_t p0 = 0, double d0 = 0.0, std::size_t p1 = 0, double d1 = 0.0);

  std::vector<Node> nodes_;
};

inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape->div(a, b); }
inline Var operator-(Var a) { return a.tape->neg(a); }

}  // namespace mugen::ad
