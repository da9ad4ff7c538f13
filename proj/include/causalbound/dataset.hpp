#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "causalbound/graph.hpp"
#include "causalbound/matrix.hpp"

namespace causalbound {

struct DatasetError : std::runtime_error {
    explicit DatasetError(const std::string& what) : std::runtime_error(what) {}
};

/// Observed samples with a column-to-node binding.
struct Dataset {
    Matrix values;                     // n x d
    std::vector<std::string> columns;  // node name per column
    uint64_t seed = 0;
    std::string source;

    int n() const { return values.rows(); }
    int d() const { return values.cols(); }

    int col(const std::string& name) const;
    Matrix column(const std::string& name) const;
    std::vector<double> column_vec(const std::string& name) const;

    /// Every observed node bound exactly once; all entries finite.
    void validate(const CausalGraph& g) const;

    /// Column means/stds (population).
    double mean(int c) const;
    double stddev(int c) const;
};

/// CSV with a header of node names; values at 17 significant digits, so
/// write/read round-trips are lossless.
void write_csv(const Dataset& data, const std::string& path);
Dataset read_csv(const std::string& path);

}  // namespace causalbound
