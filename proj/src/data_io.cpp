#include "ttkm/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "ttkm/error.hpp"
#include "ttkm/hash.hpp"

namespace ttkm {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(first, last - first + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delimiter, start);
        cells.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return cells;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Dataset make_dataset(Matrix inputs, Vector targets, std::vector<std::string> input_names, std::string target_name,
                     std::string source) {
    if (inputs.rows() != targets.size()) fail(ErrorKind::Shape, "input rows and target length differ");
    if (inputs.cols() < 1) fail(ErrorKind::Validation, "dataset needs at least one input column");
    if (!inputs.allFinite() || !targets.allFinite()) fail(ErrorKind::NonFinite, "dataset contains non-finite values");
    if (input_names.empty()) {
        for (Index d = 0; d < inputs.cols(); ++d) input_names.push_back("x" + std::to_string(d + 1));
    }
    if (static_cast<Index>(input_names.size()) != inputs.cols()) fail(ErrorKind::Shape, "column name count mismatch");
    Dataset out{std::move(inputs), std::move(targets), std::move(input_names), std::move(target_name), std::move(source), {}};
    out.row_ids.resize(static_cast<std::size_t>(out.rows()));
    for (std::size_t i = 0; i < out.row_ids.size(); ++i) out.row_ids[i] = i;
    return out;
}

std::size_t Table::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorKind::Validation, "column '" + name + "' not found");
    return static_cast<std::size_t>(it - header.begin());
}

bool Table::has_column(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

Table read_table(const std::string& path, char delimiter) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Parse, "'" + path + "' is empty; a header row is required");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // UTF-8 BOM
    Table table;
    table.header = split_line(line, delimiter);

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line, delimiter);
        if (cells.size() != table.header.size()) {
            fail(ErrorKind::Parse, "row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                       " cells, header has " + std::to_string(table.header.size()));
        }
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string& cell = cells[c];
            const std::string where = "row " + std::to_string(line_no) + ", column \"" + table.header[c] + "\"";
            if (cell.empty()) fail(ErrorKind::Parse, "missing value at " + where);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size()) {
                fail(ErrorKind::Parse, "non-numeric value '" + cell + "' at " + where);
            }
            if (!std::isfinite(v)) fail(ErrorKind::Parse, "missing or non-finite value '" + cell + "' at " + where);
            values[c] = v;
        }
        rows.push_back(std::move(values));
    }
    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) table.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return table;
}

Dataset load_csv(const std::string& path, const std::string& target_column, char delimiter) {
    const Table table = read_table(path, delimiter);
    if (!table.has_column(target_column)) {
        fail(ErrorKind::Validation, "target column '" + target_column + "' not found in '" + path + "'");
    }
    const std::size_t target_pos = table.column(target_column);
    if (table.values.rows() < 2) fail(ErrorKind::Validation, "dataset '" + path + "' needs at least 2 data rows");
    if (table.header.size() < 2) fail(ErrorKind::Validation, "dataset '" + path + "' needs at least one input column");

    const Index n = table.values.rows();
    Matrix inputs(n, static_cast<Index>(table.header.size()) - 1);
    std::vector<std::string> names;
    Index col = 0;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c == target_pos) continue;
        names.push_back(table.header[c]);
        inputs.col(col++) = table.values.col(static_cast<Index>(c));
    }
    Vector targets = table.values.col(static_cast<Index>(target_pos));
    return make_dataset(std::move(inputs), std::move(targets), std::move(names), target_column, path);
}

void write_csv(const Dataset& data, const std::string& path, char delimiter) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
    for (const auto& name : data.input_names) out << name << delimiter;
    out << data.target_name << '\n';
    for (Index r = 0; r < data.rows(); ++r) {
        for (Index c = 0; c < data.dims(); ++c) out << format_double(data.inputs(r, c)) << delimiter;
        out << format_double(data.targets[r]) << '\n';
    }
}

Dataset select_rows(const Dataset& data, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.inputs.resize(static_cast<Index>(rows.size()), data.dims());
    out.targets.resize(static_cast<Index>(rows.size()));
    out.row_ids.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto r = static_cast<Index>(rows[k]);
        if (r >= data.rows()) fail(ErrorKind::Bounds, "row index out of range");
        out.inputs.row(static_cast<Index>(k)) = data.inputs.row(r);
        out.targets[static_cast<Index>(k)] = data.targets[r];
        out.row_ids.push_back(data.row_ids.empty() ? rows[k] : data.row_ids[rows[k]]);
    }
    out.input_names = data.input_names;
    out.target_name = data.target_name;
    out.source = data.source;
    return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) fail(ErrorKind::Validation, "test fraction must lie in (0, 1)");
    const auto n = static_cast<std::size_t>(data.rows());
    auto n_train = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * (1.0 - test_fraction) - 1e-9));
    n_train = std::min(n_train, n);
    const auto order = shuffled_indices(n, seed);
    std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return {select_rows(data, train), select_rows(data, test)};
}

Dataset cyclic_shift(const Dataset& data, std::size_t k) {
    const auto dims = static_cast<std::size_t>(data.dims());
    if (k >= dims) fail(ErrorKind::Validation, "shift must lie in 0.." + std::to_string(dims - 1));
    Dataset out = data;
    for (std::size_t d = 0; d < dims; ++d) {
        const std::size_t src = (d + dims - k) % dims;
        out.inputs.col(static_cast<Index>(d)) = data.inputs.col(static_cast<Index>(src));
        out.input_names[d] = data.input_names[src];
    }
    return out;
}

Standardizer::Standardizer(Vector input_mean, Vector input_std, double target_mean, double target_std)
    : input_mean_(std::move(input_mean)), input_std_(std::move(input_std)), target_mean_(target_mean),
      target_std_(target_std) {
    if (input_mean_.size() != input_std_.size()) fail(ErrorKind::Shape, "standardizer statistics mismatch");
    if ((input_std_.array() <= 0.0).any() || !(target_std_ > 0.0)) {
        fail(ErrorKind::Validation, "standardizer deviations must be positive");
    }
}

Standardizer Standardizer::fit(const Dataset& train) {
    if (train.rows() < 2) fail(ErrorKind::Validation, "standardizer needs at least two training rows");
    const double n = static_cast<double>(train.rows());
    const Vector mean = train.inputs.colwise().mean();
    Vector sd(train.dims());
    for (Index d = 0; d < train.dims(); ++d) {
        sd[d] = std::sqrt((train.inputs.col(d).array() - mean[d]).square().sum() / n);
        if (!(sd[d] > 0.0)) {
            fail(ErrorKind::Validation, "input column \"" + train.input_names[static_cast<std::size_t>(d)] +
                                            "\" has zero variance on the training split");
        }
    }
    const double y_mean = train.targets.mean();
    const double y_sd = std::sqrt((train.targets.array() - y_mean).square().sum() / n);
    if (!(y_sd > 0.0)) fail(ErrorKind::Validation, "target \"" + train.target_name + "\" is constant on the training split");
    return Standardizer(mean, sd, y_mean, y_sd);
}

Matrix Standardizer::apply_inputs(const Matrix& inputs) const {
    if (inputs.cols() != input_mean_.size()) fail(ErrorKind::Shape, "input width does not match standardizer");
    return (inputs.rowwise() - input_mean_.transpose()).array().rowwise() / input_std_.transpose().array();
}

Vector Standardizer::apply_targets(const Vector& targets) const {
    return (targets.array() - target_mean_) / target_std_;
}

Dataset Standardizer::apply(const Dataset& data) const {
    Dataset out = data;
    out.inputs = apply_inputs(data.inputs);
    out.targets = apply_targets(data.targets);
    return out;
}

void Standardizer::invert_predictions(Vector& mean, Vector& variance) const {
    mean = invert_mean(mean);
    variance *= target_std_ * target_std_;
}

Vector Standardizer::invert_mean(const Vector& mean) const {
    return (mean.array() * target_std_ + target_mean_).matrix();
}

std::string row_ids_digest(const std::vector<std::size_t>& ids) {
    std::ostringstream text;
    for (std::size_t id : ids) text << id << '\n';
    return sha256_hex(text.str());
}

}  // namespace ttkm
