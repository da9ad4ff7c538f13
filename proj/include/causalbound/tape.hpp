#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "causalbound/matrix.hpp"

namespace causalbound::ad {

struct NonScalarLoss : std::runtime_error {
    explicit NonScalarLoss(const std::string& what) : std::runtime_error(what) {}
};
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

class Tape;

/// Handle to a tape node; cheap to copy. Valid while the tape lives.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    const Matrix& value() const;
    const Matrix& grad() const;
    int rows() const { return value().rows(); }
    int cols() const { return value().cols(); }
    double scalar() const;
};

/// Reverse-mode tape over dense matrices. Nodes are visited exactly once in
/// reverse construction order during backward(). A tape is confined to one
/// run; independent runs may use their own tapes concurrently.
class Tape {
  public:
    Var leaf(Matrix value);

    /// Generic node; `backward` receives the tape and the node's own id and
    /// must accumulate into the gradients of its inputs. Custom fused ops
    /// (e.g. the Sinkhorn loss) plug in through this.
    Var make_node(Matrix value, std::vector<int> inputs,
                  std::function<void(Tape&, int)> backward);

    Matrix& value(int id) { return nodes_[id].val; }
    const Matrix& value(int id) const { return nodes_[id].val; }
    Matrix& grad(int id) { return nodes_[id].grad; }
    const Matrix& grad(int id) const { return nodes_[id].grad; }

    /// Seeds d(loss)/d(loss) = 1 and runs the reverse sweep.
    void backward(Var loss);

    size_t size() const { return nodes_.size(); }

  private:
    struct NodeRec {
        Matrix val;
        Matrix grad;
        std::vector<int> inputs;
        std::function<void(Tape&, int)> bwd;
    };
    std::vector<NodeRec> nodes_;
};

// -- forward ops -------------------------------------------------------------
// add/sub broadcast a 1 x m row or n x 1 column on the right operand.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise, shapes must match
Var matmul(Var a, Var b);
Var scalar_mul(Var a, double s);
Var add_scalar(Var a, double s);
Var tanh_op(Var a);
Var relu(Var a);
Var exp_op(Var a);
Var log_op(Var a);  // throws DomainError on non-positive entries
Var sqrt_op(Var a);
Var sigmoid(Var a);
Var clamp(Var a, double lo, double hi);
Var sum(Var a);   // 1 x 1
Var mean(Var a);  // 1 x 1
Var logsumexp_rows(Var a);  // n x 1, max-shifted
Var logsumexp_cols(Var a);  // 1 x m
Var concat_cols(const std::vector<Var>& vs);
Var slice_cols(Var a, int c0, int c1);  // columns [c0, c1)
Var transpose(Var a);

/// Constant copy of a's value on the same tape; no gradient flows through.
Var detach(Var a);

}  // namespace causalbound::ad
