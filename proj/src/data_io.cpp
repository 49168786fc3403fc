#include "tvlasso/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "parallel.hpp"

namespace tvlasso {

const char* to_string(MissingPolicy policy) noexcept {
    switch (policy) {
        case MissingPolicy::strict: return "strict";
        case MissingPolicy::drop_row: return "drop_row";
        case MissingPolicy::forward_fill: return "forward_fill";
    }
    return "unknown";
}

MissingPolicy parse_missing_policy(const std::string& name) {
    if (name == "strict") return MissingPolicy::strict;
    if (name == "drop_row" || name == "drop") return MissingPolicy::drop_row;
    if (name == "forward_fill" || name == "ffill") return MissingPolicy::forward_fill;
    fail(ErrorCode::invalid_argument,
         "unknown missing-value policy '" + name + "' (expected strict, drop_row or forward_fill)");
}

void MultivariateSeries::validate() const {
    require(values.cols() >= 2, "series needs at least 2 columns, got " + std::to_string(values.cols()));
    require(values.rows() >= 1, "series has no rows");
    require(static_cast<Index>(labels.size()) == values.cols(), "label count does not match columns");
    require(std::set<std::string>(labels.begin(), labels.end()).size() == labels.size(),
            "column labels must be unique");
    require(values.allFinite(), "series contains non-finite values");
    require(time_index.empty() || static_cast<Index>(time_index.size()) == values.rows(),
            "time index length does not match rows");
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    std::string out(s.substr(first, last - first + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(delimiter, start);
        cells.push_back(trim(std::string_view(line).substr(start, pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return cells;
}

bool is_missing(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "N/A" || cell == "NaN" || cell == "nan" ||
           cell == "null" || cell == "NULL";
}

std::optional<double> parse_number(const std::string& cell) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    if (begin != end && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string where(const std::string& source, std::size_t line, std::size_t column, const std::string& label) {
    return source + ": row " + std::to_string(line) + ", column " + std::to_string(column) +
           (label.empty() ? "" : " ('" + label + "')");
}

}  // namespace

MultivariateSeries parse_csv(std::istream& in, const CsvOptions& options, const std::string& source) {
    MultivariateSeries series;
    std::vector<std::vector<double>> rows;
    std::vector<double> previous;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    const std::size_t skip = options.index_column ? 1 : 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split(line, options.delimiter);
        if (width == 0) {
            width = cells.size();
            require(width > skip, source + ": no data columns");
            if (options.header) {
                series.labels.assign(cells.begin() + static_cast<std::ptrdiff_t>(skip), cells.end());
                continue;
            }
            for (std::size_t j = skip; j < width; ++j)
                series.labels.push_back("col" + std::to_string(j - skip + 1));
        }
        if (cells.size() != width)
            fail(ErrorCode::parse, source + ": row " + std::to_string(line_no) + " has " +
                                       std::to_string(cells.size()) + " cells, expected " +
                                       std::to_string(width));

        std::vector<double> row(width - skip);
        bool drop = false;
        for (std::size_t j = skip; j < width; ++j) {
            const std::size_t k = j - skip;
            const std::string& cell = cells[j];
            if (is_missing(cell)) {
                switch (options.missing) {
                    case MissingPolicy::strict:
                        fail(ErrorCode::parse, "missing value at " + where(source, line_no, j + 1, series.labels[k]));
                    case MissingPolicy::drop_row:
                        drop = true;
                        break;
                    case MissingPolicy::forward_fill:
                        if (previous.empty())
                            fail(ErrorCode::parse, "cannot forward-fill the first data row at " +
                                                       where(source, line_no, j + 1, series.labels[k]));
                        row[k] = previous[k];
                        break;
                }
                continue;
            }
            const auto v = parse_number(cell);
            if (!v)
                fail(ErrorCode::parse, "unparseable value '" + cell + "' at " +
                                           where(source, line_no, j + 1, series.labels[k]));
            row[k] = *v;
        }
        if (drop) continue;
        if (options.index_column) series.time_index.push_back(cells[0]);
        previous = row;
        rows.push_back(std::move(row));
    }
    if (in.bad()) fail(ErrorCode::io, source + ": read error");
    require(width > 0, source + ": no rows");
    require(series.labels.size() >= 2,
            source + ": need at least 2 data columns, found " + std::to_string(series.labels.size()));
    require(!rows.empty(), source + ": no data rows");

    series.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(series.labels.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            series.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    series.validate();
    return options.log_returns ? to_log_returns(series) : series;
}

MultivariateSeries load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open '" + path + "'");
    return parse_csv(in, options, path);
}

MultivariateSeries to_log_returns(const MultivariateSeries& prices) {
    require(prices.rows() >= 2, "log returns need at least 2 rows");
    require((prices.values.array() > 0.0).all(), "log returns need strictly positive prices");
    MultivariateSeries out;
    out.labels = prices.labels;
    const Index n = prices.rows() - 1;
    out.values = (prices.values.bottomRows(n).array() / prices.values.topRows(n).array()).log().matrix();
    if (!prices.time_index.empty()) out.time_index.assign(prices.time_index.begin() + 1, prices.time_index.end());
    return out;
}

void write_series_csv(std::ostream& out, const MultivariateSeries& series, char delimiter) {
    const bool indexed = !series.time_index.empty();
    if (indexed) out << "time" << delimiter;
    for (std::size_t j = 0; j < series.labels.size(); ++j)
        out << (j ? std::string(1, delimiter) : "") << series.labels[j];
    out << '\n';
    for (Index i = 0; i < series.rows(); ++i) {
        if (indexed) out << series.time_index[static_cast<std::size_t>(i)] << delimiter;
        for (Index j = 0; j < series.nodes(); ++j)
            out << (j ? std::string(1, delimiter) : "") << format_double(series.values(i, j));
        out << '\n';
    }
}

NodewiseResult nodewise_stream(const MultivariateSeries& series, const StreamConfig& config, unsigned threads) {
    series.validate();
    config.validate();
    const Index d = series.nodes();
    require(series.rows() > config.burn_in, "series length " + std::to_string(series.rows()) +
                                                 " must exceed burn_in " + std::to_string(config.burn_in));

    std::vector<Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return series.labels[a] < series.labels[b]; });

    NodewiseResult result;
    result.per_node.resize(static_cast<std::size_t>(d));
    detail::parallel_for(order.size(), threads, [&](std::size_t slot) {
        const Index node = order[slot];
        Matrix predictors(series.rows(), d - 1);
        Index col = 0;
        for (Index other : order)
            if (other != node) predictors.col(col++) = series.values.col(other);
        try {
            LambdaTrace tr = run_stream(predictors, series.values.col(node), config);
            tr.replicate = static_cast<int>(node);
            result.per_node[static_cast<std::size_t>(node)] = std::move(tr);
        } catch (const Error& e) {
            throw Error(e.code(), "node '" + series.labels[node] + "': " + e.what());
        }
    });

    std::vector<LambdaTrace> sorted;
    sorted.reserve(order.size());
    for (Index node : order) sorted.push_back(result.per_node[static_cast<std::size_t>(node)]);
    LambdaTrace avg = average_traces(sorted);
    avg.replicate.reset();
    result.averaged_normalized = normalize_unit_interval(avg);
    return result;
}

}  // namespace tvlasso
