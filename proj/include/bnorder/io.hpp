#pragma once

// Dataset CSV ingestion and JSON model / distribution documents.
//
// CSV: the first row holds variable names. A column whose values are all
// non-negative integers is read as explicit state indices (cardinality =
// max + 1); any other column is categorical, with states numbered by the
// ascending byte-wise order of its distinct values.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "bnorder/duality.hpp"
#include "bnorder/exact.hpp"
#include "bnorder/model.hpp"

namespace bnorder {

using StateLabels = std::vector<std::vector<std::string>>;

class CsvError : public Error {
public:
    enum class Kind { ragged_row, empty_dataset, missing_cell, cardinality_one, unknown_state, io };

    CsvError(Kind kind, std::size_t line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), kind_(kind), line_(line) {}

    Kind kind() const { return kind_; }
    std::size_t line() const { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

class SchemaError : public Error {
public:
    SchemaError(const std::string& path, const std::string& message)
        : Error(path + ": " + message), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct CsvOptions {
    // Keep constant columns, padding them to two states.
    bool allow_constant = false;
};

struct ParsedDataset {
    Dataset data;
    StateLabels labels;  // labels[v][state]
};

ParsedDataset parse_dataset_csv(std::istream& in, const CsvOptions& options = {});
ParsedDataset parse_dataset_csv(const std::filesystem::path& path, const CsvOptions& options = {});

// Re-encodes a CSV against a known mapping. Columns are matched to `specs` by
// name; extra columns are ignored.
Dataset encode_dataset_csv(std::istream& in, const Specs& specs, const StateLabels& labels);

void write_dataset_csv(std::ostream& out, const Dataset& data, const StateLabels& labels);

StateLabels default_labels(const Specs& specs);

inline constexpr int kFormatVersion = 1;

struct ModelDocument {
    BayesNet net;
    StateLabels labels;
};

struct DistributionDocument {
    JointTable dist;
    StateLabels labels;
};

void write_model(std::ostream& out, const ModelDocument& doc);
ModelDocument read_model(std::istream& in);
ModelDocument read_model(const std::filesystem::path& path);

void write_distribution(std::ostream& out, const DistributionDocument& doc);
DistributionDocument read_distribution(std::istream& in);
DistributionDocument read_distribution(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const SearchStep& step, const Specs& specs);
nlohmann::ordered_json to_json(const SearchTrace& trace, const Specs& specs);
nlohmann::ordered_json to_json(const IdentityReport& report);
nlohmann::ordered_json to_json(const DualSearchReport& report, const Specs& specs);

}  // namespace bnorder
