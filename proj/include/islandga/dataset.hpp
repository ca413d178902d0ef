#ifndef ISLANDGA_DATASET_HPP
#define ISLANDGA_DATASET_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "islandga/core.hpp"
#include "islandga/errors.hpp"

/// Dataset handling for the feature-subset-selection application.
///
/// CSV profile: UTF-8, first line holds the attribute names, fields are
/// comma-separated with no quoting or escapes and no missing values, the
/// last column is the class. A column is numeric iff every value parses
/// fully as a decimal number; the class column is always nominal. Nominal
/// value sets keep first-appearance order, which is the declared order
/// used by tie-breaks downstream.
namespace islandga::fss {

struct Attribute {
    std::string name;
    bool numeric = false;
    std::vector<std::string> values; // nominal values, declared order; empty for numeric

    friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// Column-major instance storage: numeric cells as doubles, nominal cells
/// as indices into the attribute's declared value list.
class Dataset {
public:
    Dataset() = default;

    Dataset(std::vector<Attribute> attributes, Attribute class_attribute)
        : attributes_(std::move(attributes)), class_attribute_(std::move(class_attribute)) {
        columns_.resize(attributes_.size());
    }

    const std::vector<Attribute>& attributes() const { return attributes_; }
    const Attribute& class_attribute() const { return class_attribute_; }
    std::size_t num_attributes() const { return attributes_.size(); }
    std::size_t size() const { return rows_; }

    double numeric_value(std::size_t attribute, std::size_t row) const {
        return columns_[attribute].numeric[row];
    }
    std::uint32_t nominal_value(std::size_t attribute, std::size_t row) const {
        return columns_[attribute].nominal[row];
    }
    std::uint32_t class_value(std::size_t row) const { return class_column_[row]; }

    bool schema_matches(const Dataset& other) const {
        return attributes_ == other.attributes_ && class_attribute_ == other.class_attribute_;
    }

    /// Appends one instance; cells must already be encoded per column kind.
    void append_row(std::span<const double> numeric_cells,
                    std::span<const std::uint32_t> nominal_cells, std::uint32_t class_cell) {
        std::size_t num_i = 0;
        std::size_t nom_i = 0;
        for (std::size_t a = 0; a < attributes_.size(); ++a) {
            if (attributes_[a].numeric)
                columns_[a].numeric.push_back(numeric_cells[num_i++]);
            else
                columns_[a].nominal.push_back(nominal_cells[nom_i++]);
        }
        class_column_.push_back(class_cell);
        ++rows_;
    }

    /// New dataset with the given rows, in the given order; schema shared.
    Dataset select_rows(std::span<const std::uint32_t> rows) const {
        Dataset out(attributes_, class_attribute_);
        for (std::size_t a = 0; a < attributes_.size(); ++a) {
            auto& col = out.columns_[a];
            if (attributes_[a].numeric) {
                col.numeric.reserve(rows.size());
                for (auto r : rows) col.numeric.push_back(columns_[a].numeric[r]);
            } else {
                col.nominal.reserve(rows.size());
                for (auto r : rows) col.nominal.push_back(columns_[a].nominal[r]);
            }
        }
        out.class_column_.reserve(rows.size());
        for (auto r : rows) out.class_column_.push_back(class_column_[r]);
        out.rows_ = rows.size();
        return out;
    }

    /// Keeps the attributes whose mask bit is 1; the class column is always
    /// retained. Instance order is preserved.
    Dataset project(const Genome& mask) const {
        if (mask.size() != attributes_.size())
            throw ContractError("attribute mask length must equal the attribute count");
        std::vector<Attribute> kept;
        for (std::size_t a = 0; a < attributes_.size(); ++a)
            if (mask.bit(a)) kept.push_back(attributes_[a]);
        Dataset out(std::move(kept), class_attribute_);
        std::size_t k = 0;
        for (std::size_t a = 0; a < attributes_.size(); ++a) {
            if (!mask.bit(a)) continue;
            out.columns_[k++] = columns_[a];
        }
        out.class_column_ = class_column_;
        out.rows_ = rows_;
        return out;
    }

private:
    struct Column {
        std::vector<double> numeric;
        std::vector<std::uint32_t> nominal;
    };

    std::vector<Attribute> attributes_;
    Attribute class_attribute_;
    std::vector<Column> columns_;
    std::vector<std::uint32_t> class_column_;
    std::size_t rows_ = 0;
};

inline Dataset project(const Dataset& dataset, const Genome& mask) {
    return dataset.project(mask);
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.emplace_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

inline bool parses_as_decimal(std::string_view s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

} // namespace detail

/// Parses the CSV profile from text. `source` names the input in error
/// messages; line numbers are 1-based and count the header line.
inline Dataset parse_dataset_csv(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            std::string_view line = text.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines.push_back(line);
            start = i + 1;
        }
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ParseError::at_line(1, "empty dataset: no header line");

    const auto header = detail::split_csv_line(lines[0]);
    if (header.empty() || header.back().empty())
        throw ParseError::at_line(1, "header must name every column");
    const std::size_t num_columns = header.size();
    if (lines.size() < 2) throw ParseError::at_line(1, "empty dataset: no instances");

    std::vector<std::vector<std::string>> rows;
    rows.reserve(lines.size() - 1);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        auto fields = detail::split_csv_line(lines[li]);
        if (fields.size() != num_columns)
            throw ParseError::at_line(li + 1, "row has " + std::to_string(fields.size()) +
                                                  " fields, expected " +
                                                  std::to_string(num_columns));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (fields[c].empty())
                throw ParseError::at_line(li + 1, "missing value in column '" + header[c] + "'");
        }
        rows.push_back(std::move(fields));
    }

    // Kind inference: a column is numeric iff all values parse as decimals;
    // the class column (last) is always nominal.
    std::vector<bool> numeric(num_columns, false);
    for (std::size_t c = 0; c + 1 < num_columns; ++c) {
        bool all_numeric = true;
        for (const auto& row : rows) {
            double unused;
            if (!detail::parses_as_decimal(row[c], unused)) {
                all_numeric = false;
                break;
            }
        }
        numeric[c] = all_numeric;
    }

    std::vector<Attribute> attributes;
    attributes.reserve(num_columns - 1);
    std::vector<std::vector<std::string>> value_order(num_columns);
    auto nominal_index = [&](std::size_t c, const std::string& value) -> std::uint32_t {
        auto& declared = value_order[c];
        for (std::size_t i = 0; i < declared.size(); ++i)
            if (declared[i] == value) return static_cast<std::uint32_t>(i);
        declared.push_back(value);
        return static_cast<std::uint32_t>(declared.size() - 1);
    };

    // First collect declared value orders so Attribute objects are complete
    // before rows are appended.
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < num_columns; ++c) {
            if (c + 1 < num_columns && numeric[c]) continue;
            nominal_index(c, row[c]);
        }
    }
    for (std::size_t c = 0; c + 1 < num_columns; ++c)
        attributes.push_back(Attribute{header[c], numeric[c], value_order[c]});
    Attribute class_attribute{header.back(), false, value_order.back()};

    Dataset dataset(std::move(attributes), std::move(class_attribute));
    std::vector<double> numeric_cells;
    std::vector<std::uint32_t> nominal_cells;
    for (const auto& row : rows) {
        numeric_cells.clear();
        nominal_cells.clear();
        for (std::size_t c = 0; c + 1 < num_columns; ++c) {
            if (numeric[c]) {
                double v = 0.0;
                detail::parses_as_decimal(row[c], v);
                numeric_cells.push_back(v);
            } else {
                nominal_cells.push_back(nominal_index(c, row[c]));
            }
        }
        dataset.append_row(numeric_cells, nominal_cells, nominal_index(num_columns - 1, row.back()));
    }
    return dataset;
}

inline Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_dataset_csv(buffer.str());
}

/// Positional split: the first ceil(n * ratio) instances become the
/// training part, the rest the test part. No shuffling.
inline std::pair<Dataset, Dataset> split_train_test(const Dataset& dataset, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("train_ratio must be in (0,1)");
    const std::size_t n = dataset.size();
    const auto train_size =
        static_cast<std::size_t>(std::ceil(static_cast<double>(n) * ratio));
    if (train_size == 0 || train_size >= n)
        throw DataError("train/test split leaves one side empty");
    std::vector<std::uint32_t> train_rows(train_size);
    std::vector<std::uint32_t> test_rows(n - train_size);
    std::iota(train_rows.begin(), train_rows.end(), 0u);
    std::iota(test_rows.begin(), test_rows.end(), static_cast<std::uint32_t>(train_size));
    return {dataset.select_rows(train_rows), dataset.select_rows(test_rows)};
}

} // namespace islandga::fss

#endif // ISLANDGA_DATASET_HPP
