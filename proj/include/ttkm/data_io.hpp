#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ttkm/tensor_ops.hpp"

namespace ttkm {

struct Dataset {
    Matrix inputs;                          // N x D
    Vector targets;                         // N
    std::vector<std::string> input_names;   // D
    std::string target_name;
    std::string source;
    std::vector<std::size_t> row_ids;       // original row positions, preserved through splits

    Index rows() const noexcept { return inputs.rows(); }
    Index dims() const noexcept { return inputs.cols(); }
};

/// Validates shape and finiteness and fills row ids if absent.
Dataset make_dataset(Matrix inputs, Vector targets, std::vector<std::string> input_names = {},
                     std::string target_name = "y", std::string source = "memory");

/// Raw numeric CSV contents.
struct Table {
    std::vector<std::string> header;
    Matrix values;  // rows x header.size()

    /// Position of `name` in the header; throws a validation error when absent.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

Table read_table(const std::string& path, char delimiter = ',');

/// Header row required; every cell must parse as a finite number. Row numbers in errors
/// count the header as row 1.
Dataset load_csv(const std::string& path, const std::string& target_column, char delimiter = ',');

/// Writes inputs then target, `%.17g` formatted.
void write_csv(const Dataset& data, const std::string& path, char delimiter = ',');

Dataset select_rows(const Dataset& data, const std::vector<std::size_t>& rows);

/// Seeded uniform shuffle; the train part gets ceil(N (1 - f)) rows.
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed);

/// Columns rotated right by k: k = 1 maps [x_1, ..., x_D] to [x_D, x_1, ..., x_{D-1}].
Dataset cyclic_shift(const Dataset& data, std::size_t k);

/// Seeded shuffle of 0..n-1 shared by splitting and cross-validation folds.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

/// z-score statistics fitted on a training split only.
class Standardizer {
public:
    Standardizer() = default;
    Standardizer(Vector input_mean, Vector input_std, double target_mean, double target_std);

    static Standardizer fit(const Dataset& train);

    Matrix apply_inputs(const Matrix& inputs) const;
    Vector apply_targets(const Vector& targets) const;
    Dataset apply(const Dataset& data) const;

    /// Mean m -> m sigma_y + mu_y, variance v -> v sigma_y^2.
    void invert_predictions(Vector& mean, Vector& variance) const;
    Vector invert_mean(const Vector& mean) const;

    const Vector& input_mean() const noexcept { return input_mean_; }
    const Vector& input_std() const noexcept { return input_std_; }
    double target_mean() const noexcept { return target_mean_; }
    double target_std() const noexcept { return target_std_; }

private:
    Vector input_mean_;
    Vector input_std_;
    double target_mean_ = 0.0;
    double target_std_ = 1.0;
};

/// Round-trippable `%.17g` rendering used for every CSV artifact.
std::string format_double(double v);

/// SHA-256 of the row ids, used to check that runs share a test split.
std::string row_ids_digest(const std::vector<std::size_t>& ids);

}  // namespace ttkm
