#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "causalbound/matrix.hpp"
#include "causalbound/tape.hpp"

namespace causalbound::ad {

/// Named parameter matrices with persistent gradient slots. Shapes are fixed
/// at registration; names are unique. Iteration order = registration order.
class ParamStore {
  public:
    int add(const std::string& name, Matrix init);

    int count() const { return static_cast<int>(entries_.size()); }
    bool has(const std::string& name) const { return index_.count(name) > 0; }
    int index_of(const std::string& name) const;
    const std::string& name_of(int i) const { return entries_[i].name; }

    Matrix& value(int i) { return entries_[i].value; }
    const Matrix& value(int i) const { return entries_[i].value; }
    Matrix& value(const std::string& name) { return entries_[index_of(name)].value; }
    Matrix& grad(int i) { return entries_[i].grad; }
    const Matrix& grad(int i) const { return entries_[i].grad; }

    void zero_grads();
    double grad_norm() const;  // global L2 norm over all parameters

    int64_t step() const { return step_; }
    void bump_step() { ++step_; }

    /// In-memory snapshot of values only (optimizer state excluded).
    std::vector<Matrix> snapshot() const;
    void restore(const std::vector<Matrix>& snap);

    /// Text checkpoint: `param <name> <rows> <cols>` then row-major values at
    /// 17 significant digits.
    void save(const std::string& path) const;
    static ParamStore load(const std::string& path);
    void load_values(const std::string& path);  // into matching entries

  private:
    struct Entry {
        std::string name;
        Matrix value;
        Matrix grad;
    };
    std::vector<Entry> entries_;
    std::unordered_map<std::string, int> index_;
    int64_t step_ = 0;

    friend void sgd_adam_step(ParamStore&, double, double);
    std::shared_ptr<void> builtin_adam_;
};

/// Leaf Var backed by a stored parameter; backward accumulates into the
/// store's gradient slot.
Var param_leaf(Tape& tape, ParamStore& store, int index);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip = 0.0;  // 0 disables global-norm clipping
};

class AdamOptimizer {
  public:
    explicit AdamOptimizer(AdamConfig cfg) : cfg_(cfg) {}

    AdamConfig& config() { return cfg_; }
    void reset();

    /// One update from the store's current gradients; zeroes them afterwards.
    void step(ParamStore& store);

  private:
    AdamConfig cfg_;
    std::vector<Matrix> m_, v_;
    int64_t t_ = 0;
};

/// Adam step with defaults beta1=0.9, beta2=0.999, eps=1e-8 using the store's
/// built-in optimizer state; clip <= 0 disables gradient clipping.
void sgd_adam_step(ParamStore& store, double lr, double clip = 0.0);

}  // namespace causalbound::ad
