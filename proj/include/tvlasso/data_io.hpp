#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tvlasso/harness.hpp"

namespace tvlasso {

/// What to do with empty / NA cells.
enum class MissingPolicy { strict, drop_row, forward_fill };

const char* to_string(MissingPolicy policy) noexcept;
MissingPolicy parse_missing_policy(const std::string& name);

struct CsvOptions {
    char delimiter = ',';
    bool header = true;
    MissingPolicy missing = MissingPolicy::strict;
    /// First column holds timestamps / ordinal labels rather than data.
    bool index_column = false;
    /// Convert a price panel to log-returns after parsing.
    bool log_returns = false;
};

struct MultivariateSeries {
    std::vector<std::string> labels;
    Matrix values;
    /// Empty when the file had no index column.
    std::vector<std::string> time_index;

    Index rows() const noexcept { return values.rows(); }
    Index nodes() const noexcept { return values.cols(); }

    /// d >= 2, unique labels, finite values, index length matches.
    void validate() const;
};

MultivariateSeries parse_csv(std::istream& in, const CsvOptions& options,
                             const std::string& source = "<input>");
MultivariateSeries load_csv(const std::string& path, const CsvOptions& options = {});

/// log(v_t / v_{t-1}); drops the first row. All values must be positive.
MultivariateSeries to_log_returns(const MultivariateSeries& prices);

void write_series_csv(std::ostream& out, const MultivariateSeries& series, char delimiter = ',');

struct NodewiseResult {
    /// One trace per column, in input column order.
    std::vector<LambdaTrace> per_node;
    /// Pointwise mean of the node traces, mapped to [0, 1].
    LambdaTrace averaged_normalized;
};

/// Regresses every column on all remaining columns with run_stream. Nodes
/// are processed, and their predictors ordered, by label, so permuting the
/// input columns permutes per_node and leaves the average bit-identical.
NodewiseResult nodewise_stream(const MultivariateSeries& series, const StreamConfig& config,
                               unsigned threads = 0);

}  // namespace tvlasso
