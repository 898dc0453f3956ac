#include "bnorder/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace bnorder {

using nlohmann::ordered_json;

namespace {

struct Record {
    std::size_t line = 0;  // 1-based line where the record starts
    std::vector<std::string> fields;
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

// RFC 4180-ish reader: quoted fields may contain commas, doubled quotes and
// newlines. CR before LF is dropped. Blank lines are skipped.
std::vector<Record> read_records(std::istream& in) {
    std::vector<Record> out;
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) text.erase(0, 3);

    std::size_t line = 1;
    std::size_t pos = 0;
    while (pos < text.size()) {
        Record rec;
        rec.line = line;
        std::string field;
        bool quoted_field = false;
        bool in_quotes = false;
        bool end_of_record = false;
        while (pos < text.size() && !end_of_record) {
            const char ch = text[pos++];
            if (in_quotes) {
                if (ch == '"') {
                    if (pos < text.size() && text[pos] == '"') {
                        field.push_back('"');
                        ++pos;
                    } else {
                        in_quotes = false;
                    }
                } else {
                    if (ch == '\n') ++line;
                    field.push_back(ch);
                }
                continue;
            }
            switch (ch) {
                case '"':
                    if (trim(field).empty()) {
                        field.clear();
                        in_quotes = quoted_field = true;
                    } else {
                        field.push_back(ch);
                    }
                    break;
                case ',':
                    rec.fields.push_back(quoted_field ? field : trim(field));
                    field.clear();
                    quoted_field = false;
                    break;
                case '\r':
                    break;
                case '\n':
                    ++line;
                    end_of_record = true;
                    break;
                default:
                    field.push_back(ch);
            }
        }
        if (in_quotes) throw CsvError(CsvError::Kind::ragged_row, rec.line, "unterminated quoted field");
        rec.fields.push_back(quoted_field ? field : trim(field));
        if (rec.fields.size() == 1 && rec.fields[0].empty() && !quoted_field) continue;
        out.push_back(std::move(rec));
    }
    return out;
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA"; }

bool is_index(const std::string& cell) {
    return !cell.empty() && cell.size() <= 9 &&
           std::all_of(cell.begin(), cell.end(), [](char c) { return c >= '0' && c <= '9'; });
}

constexpr std::size_t kMaxIndexState = 1'000'000;

std::vector<Record> read_table(std::istream& in) {
    std::vector<Record> records = read_records(in);
    if (records.empty()) throw CsvError(CsvError::Kind::empty_dataset, 1, "no header row");
    const std::size_t width = records[0].fields.size();
    for (std::size_t k = 0; k < width; ++k)
        if (records[0].fields[k].empty())
            throw CsvError(CsvError::Kind::missing_cell, records[0].line,
                           "empty variable name in column " + std::to_string(k + 1));
    for (std::size_t r = 1; r < records.size(); ++r) {
        const Record& rec = records[r];
        if (rec.fields.size() != width)
            throw CsvError(CsvError::Kind::ragged_row, rec.line,
                           "expected " + std::to_string(width) + " fields, found " +
                               std::to_string(rec.fields.size()));
        for (std::size_t k = 0; k < width; ++k)
            if (is_missing(rec.fields[k]))
                throw CsvError(CsvError::Kind::missing_cell, rec.line,
                               "missing value for '" + records[0].fields[k] + "'");
    }
    if (records.size() == 1) throw CsvError(CsvError::Kind::empty_dataset, records[0].line, "no data rows");
    return records;
}

[[noreturn]] void schema(const std::string& path, const std::string& message) {
    throw SchemaError(path, message);
}

const ordered_json& field(const ordered_json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) schema(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) schema(path + "/" + key, "missing field");
    return *it;
}

std::size_t as_size(const ordered_json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        schema(path, "expected a non-negative integer");
    return j.get<std::size_t>();
}

double as_double(const ordered_json& j, const std::string& path) {
    if (!j.is_number()) schema(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v) || v < 0.0) schema(path, "expected a finite non-negative number");
    return v;
}

const ordered_json& as_array(const ordered_json& j, const std::string& path, std::size_t size) {
    if (!j.is_array()) schema(path, "expected an array");
    if (j.size() != size)
        schema(path, "expected " + std::to_string(size) + " entries, found " + std::to_string(j.size()));
    return j;
}

void check_version(const ordered_json& doc) {
    const ordered_json& v = field(doc, "format_version", "");
    if (!v.is_number_integer() || v.get<long long>() != kFormatVersion)
        schema("/format_version", "unsupported format version " + v.dump());
}

ordered_json parse_json(std::istream& in) {
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        schema("", e.what());
    }
}

// Entries within 1e-12 of a unit sum are kept as written so that a rewrite is
// byte-identical; up to 1e-9 they are rescaled; beyond that rejected.
void normalize(std::vector<double>& values, const std::string& path) {
    double sum = 0.0;
    for (double v : values) sum += v;
    if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "probabilities sum to " << sum;
        schema(path, msg.str());
    }
    if (std::abs(sum - 1.0) > 1e-12)
        for (double& v : values) v /= sum;
}

ordered_json variables_json(const Specs& specs, const StateLabels& labels) {
    ordered_json vars = ordered_json::array();
    for (Var v = 0; v < specs.size(); ++v) {
        ordered_json var;
        var["name"] = specs[v].name;
        var["cardinality"] = specs[v].cardinality;
        var["states"] = v < labels.size() ? labels[v] : default_labels({specs[v]})[0];
        vars.push_back(std::move(var));
    }
    return vars;
}

std::size_t sorted_unique_strings(std::vector<std::string> values) {
    std::sort(values.begin(), values.end());
    return static_cast<std::size_t>(std::unique(values.begin(), values.end()) - values.begin());
}

void read_variables(const ordered_json& doc, Specs& specs, StateLabels& labels) {
    const ordered_json& vars = field(doc, "variables", "");
    if (!vars.is_array() || vars.empty()) schema("/variables", "expected a non-empty array");
    for (std::size_t v = 0; v < vars.size(); ++v) {
        const std::string path = "/variables/" + std::to_string(v);
        const ordered_json& name = field(vars[v], "name", path);
        if (!name.is_string()) schema(path + "/name", "expected a string");
        const std::size_t card = as_size(field(vars[v], "cardinality", path), path + "/cardinality");
        if (card < 2) schema(path + "/cardinality", "cardinality must be at least 2");
        std::vector<std::string> states;
        if (vars[v].contains("states")) {
            const ordered_json& s = as_array(vars[v]["states"], path + "/states", card);
            for (std::size_t k = 0; k < card; ++k) {
                if (!s[k].is_string()) schema(path + "/states/" + std::to_string(k), "expected a string");
                states.push_back(s[k].get<std::string>());
            }
            if (sorted_unique_strings(states) != card) schema(path + "/states", "repeated state label");
        } else {
            for (std::size_t k = 0; k < card; ++k) states.push_back(std::to_string(k));
        }
        specs.push_back({name.get<std::string>(), card});
        labels.push_back(std::move(states));
    }
    try {
        validate_specs(specs);
    } catch (const std::invalid_argument& e) {
        schema("/variables", e.what());
    }
}

Var lookup(const std::map<std::string, Var>& index, const ordered_json& j, const std::string& path) {
    if (!j.is_string()) schema(path, "expected a variable name");
    const auto it = index.find(j.get<std::string>());
    if (it == index.end()) schema(path, "unknown variable '" + j.get<std::string>() + "'");
    return it->second;
}

ordered_json names(const Specs& specs, const Scope& scope) {
    ordered_json out = ordered_json::array();
    for (Var v : scope) out.push_back(specs.at(v).name);
    return out;
}

}  // namespace

ParsedDataset parse_dataset_csv(std::istream& in, const CsvOptions& options) {
    const std::vector<Record> records = read_table(in);
    const std::size_t width = records[0].fields.size();
    const std::size_t rows = records.size() - 1;

    Specs specs;
    StateLabels labels;
    std::vector<std::uint32_t> cells(rows * width);
    for (std::size_t k = 0; k < width; ++k) {
        const std::string& name = records[0].fields[k];
        bool integer = true;
        for (std::size_t r = 1; r <= rows && integer; ++r) integer = is_index(records[r].fields[k]);

        std::vector<std::string> states;
        if (integer) {
            std::size_t max_state = 0;
            for (std::size_t r = 1; r <= rows; ++r) {
                const std::size_t s = std::stoul(records[r].fields[k]);
                if (s > kMaxIndexState)
                    throw CsvError(CsvError::Kind::unknown_state, records[r].line,
                                   "state index " + records[r].fields[k] + " of '" + name + "' is too large");
                max_state = std::max(max_state, s);
                cells[(r - 1) * width + k] = static_cast<std::uint32_t>(s);
            }
            for (std::size_t s = 0; s <= max_state; ++s) states.push_back(std::to_string(s));
        } else {
            std::map<std::string, std::uint32_t> mapping;
            for (std::size_t r = 1; r <= rows; ++r) mapping.emplace(records[r].fields[k], 0);
            std::uint32_t next = 0;
            for (auto& [label, state] : mapping) {
                state = next++;
                states.push_back(label);
            }
            for (std::size_t r = 1; r <= rows; ++r)
                cells[(r - 1) * width + k] = mapping.at(records[r].fields[k]);
        }
        if (states.size() < 2) {
            if (!options.allow_constant)
                throw CsvError(CsvError::Kind::cardinality_one, records[0].line,
                               "column '" + name + "' takes a single value");
            states.push_back(integer ? "1" : "<unused>");
        }
        specs.push_back({name, states.size()});
        labels.push_back(std::move(states));
    }
    try {
        validate_specs(specs);
    } catch (const std::invalid_argument& e) {
        throw CsvError(CsvError::Kind::io, records[0].line, e.what());
    }
    return {Dataset(std::move(specs), std::move(cells)), std::move(labels)};
}

ParsedDataset parse_dataset_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError(CsvError::Kind::io, 0, "cannot open " + path.string());
    return parse_dataset_csv(in, options);
}

Dataset encode_dataset_csv(std::istream& in, const Specs& specs, const StateLabels& labels) {
    if (labels.size() != specs.size()) throw std::invalid_argument("one label list per variable required");
    const std::vector<Record> records = read_table(in);
    const auto& header = records[0].fields;
    std::vector<std::size_t> column(specs.size());
    for (Var v = 0; v < specs.size(); ++v) {
        const auto it = std::find(header.begin(), header.end(), specs[v].name);
        if (it == header.end())
            throw CsvError(CsvError::Kind::missing_cell, records[0].line,
                           "no column named '" + specs[v].name + "'");
        column[v] = static_cast<std::size_t>(it - header.begin());
    }
    std::vector<std::map<std::string, std::uint32_t>> mapping(specs.size());
    for (Var v = 0; v < specs.size(); ++v)
        for (std::size_t s = 0; s < labels[v].size(); ++s)
            mapping[v].emplace(labels[v][s], static_cast<std::uint32_t>(s));

    const std::size_t rows = records.size() - 1;
    std::vector<std::uint32_t> cells(rows * specs.size());
    for (std::size_t r = 1; r <= rows; ++r)
        for (Var v = 0; v < specs.size(); ++v) {
            const std::string& cell = records[r].fields[column[v]];
            const auto it = mapping[v].find(cell);
            if (it == mapping[v].end())
                throw CsvError(CsvError::Kind::unknown_state, records[r].line,
                               "'" + cell + "' is not a state of '" + specs[v].name + "'");
            cells[(r - 1) * specs.size() + v] = it->second;
        }
    return Dataset(specs, std::move(cells));
}

namespace {

void write_field(std::ostream& out, const std::string& s) {
    const bool quote = s.empty() || s.find_first_of(",\"\r\n") != std::string::npos ||
                       s.front() == ' ' || s.back() == ' ' || s.front() == '\t' || s.back() == '\t';
    if (!quote) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

}  // namespace

void write_dataset_csv(std::ostream& out, const Dataset& data, const StateLabels& labels) {
    const Specs& specs = data.specs();
    if (labels.size() != specs.size()) throw std::invalid_argument("one label list per variable required");
    for (Var v = 0; v < specs.size(); ++v) {
        if (v) out << ',';
        write_field(out, specs[v].name);
    }
    out << '\n';
    for (std::size_t r = 0; r < data.num_rows(); ++r) {
        for (Var v = 0; v < specs.size(); ++v) {
            if (v) out << ',';
            write_field(out, labels[v].at(data.at(r, v)));
        }
        out << '\n';
    }
}

StateLabels default_labels(const Specs& specs) {
    StateLabels out(specs.size());
    for (Var v = 0; v < specs.size(); ++v)
        for (std::size_t s = 0; s < specs[v].cardinality; ++s) out[v].push_back(std::to_string(s));
    return out;
}

void write_model(std::ostream& out, const ModelDocument& doc) {
    const BayesNet& net = doc.net;
    const Specs& specs = net.specs();
    ordered_json j;
    j["format_version"] = kFormatVersion;
    j["variables"] = variables_json(specs, doc.labels);
    j["ordering"] = names(specs, net.ordering().order());
    ordered_json nodes = ordered_json::array();
    for (Var v = 0; v < specs.size(); ++v) {
        const Cpt& cpt = net.cpt(v);
        ordered_json node;
        node["variable"] = specs[v].name;
        node["parents"] = names(specs, cpt.parents());
        ordered_json rows = ordered_json::array();
        ordered_json defined = ordered_json::array();
        for (std::size_t r = 0; r < cpt.num_rows(); ++r) {
            const auto row = cpt.row(r);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
            defined.push_back(cpt.defined(r));
        }
        node["rows"] = std::move(rows);
        node["defined"] = std::move(defined);
        nodes.push_back(std::move(node));
    }
    j["cpts"] = std::move(nodes);
    out << j.dump(2) << '\n';
}

ModelDocument read_model(std::istream& in) {
    const ordered_json doc = parse_json(in);
    check_version(doc);
    Specs specs;
    StateLabels labels;
    read_variables(doc, specs, labels);
    std::map<std::string, Var> index;
    for (Var v = 0; v < specs.size(); ++v) index[specs[v].name] = v;

    const ordered_json& ord = as_array(field(doc, "ordering", ""), "/ordering", specs.size());
    std::vector<Var> order;
    for (std::size_t k = 0; k < ord.size(); ++k)
        order.push_back(lookup(index, ord[k], "/ordering/" + std::to_string(k)));
    NodeOrdering ordering;
    try {
        ordering = NodeOrdering(order);
    } catch (const std::exception& e) {
        schema("/ordering", e.what());
    }

    const ordered_json& nodes = as_array(field(doc, "cpts", ""), "/cpts", specs.size());
    std::vector<Scope> parents(specs.size());
    std::vector<Cpt> cpts;
    for (Var v = 0; v < specs.size(); ++v) {
        const std::string path = "/cpts/" + std::to_string(v);
        const ordered_json& node = nodes[v];
        if (lookup(index, field(node, "variable", path), path + "/variable") != v)
            schema(path + "/variable", "entries must follow the variable list");
        const ordered_json& pa = field(node, "parents", path);
        if (!pa.is_array()) schema(path + "/parents", "expected an array");
        for (std::size_t k = 0; k < pa.size(); ++k) {
            const Var p = lookup(index, pa[k], path + "/parents/" + std::to_string(k));
            if (!parents[v].empty() && !ordering.precedes(parents[v].back(), p))
                schema(path + "/parents", "parents must be listed in node-ordering order without repeats");
            parents[v].push_back(p);
        }
        std::size_t configs = 0;
        try {
            for (Var p : parents[v])
                if (!ordering.precedes(p, v)) throw OrderViolation(v, p);
            configs = state_space_size(specs, parents[v], kMaxCountCells);
        } catch (const Error& e) {
            schema(path + "/parents", e.what());
        }
        const std::size_t card = specs[v].cardinality;
        const ordered_json& rows = as_array(field(node, "rows", path), path + "/rows", configs);
        // "defined" is optional; absent means every row is defined
        const ordered_json all_defined(std::vector<bool>(configs, true));
        const ordered_json& def = node.contains("defined")
                                      ? as_array(node["defined"], path + "/defined", configs)
                                      : all_defined;
        std::vector<double> table;
        std::vector<bool> defined;
        for (std::size_t r = 0; r < configs; ++r) {
            const std::string rpath = path + "/rows/" + std::to_string(r);
            if (!def[r].is_boolean()) schema(path + "/defined/" + std::to_string(r), "expected a boolean");
            const ordered_json& row = as_array(rows[r], rpath, card);
            std::vector<double> probs;
            for (std::size_t k = 0; k < card; ++k)
                probs.push_back(as_double(row[k], rpath + "/" + std::to_string(k)));
            if (def[r].get<bool>()) normalize(probs, rpath);
            table.insert(table.end(), probs.begin(), probs.end());
            defined.push_back(def[r].get<bool>());
        }
        cpts.emplace_back(v, card, parents[v], cardinalities_of(specs, parents[v]), std::move(table),
                          std::move(defined));
    }
    OrderedDag dag = validate_dag(specs, ordering, parents);
    return {BayesNet(specs, std::move(dag), std::move(cpts)), std::move(labels)};
}

ModelDocument read_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path.string(), "cannot open file");
    return read_model(in);
}

void write_distribution(std::ostream& out, const DistributionDocument& doc) {
    ordered_json j;
    j["format_version"] = kFormatVersion;
    j["variables"] = variables_json(doc.dist.specs(), doc.labels);
    j["probabilities"] = doc.dist.probs();
    out << j.dump(2) << '\n';
}

DistributionDocument read_distribution(std::istream& in) {
    const ordered_json doc = parse_json(in);
    check_version(doc);
    Specs specs;
    StateLabels labels;
    read_variables(doc, specs, labels);
    Scope all(specs.size());
    for (Var v = 0; v < all.size(); ++v) all[v] = v;
    std::size_t cells = 0;
    try {
        cells = state_space_size(specs, all, kMaxJointCells);
    } catch (const Error& e) {
        schema("/variables", e.what());
    }
    const ordered_json& arr = as_array(field(doc, "probabilities", ""), "/probabilities", cells);
    std::vector<double> probs;
    probs.reserve(cells);
    for (std::size_t k = 0; k < cells; ++k) probs.push_back(as_double(arr[k], "/probabilities/" + std::to_string(k)));
    normalize(probs, "/probabilities");
    try {
        return {JointTable(std::move(specs), std::move(probs)), std::move(labels)};
    } catch (const std::invalid_argument& e) {
        schema("/probabilities", e.what());
    }
}

DistributionDocument read_distribution(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path.string(), "cannot open file");
    return read_distribution(in);
}

ordered_json to_json(const SearchStep& step, const Specs& specs) {
    ordered_json j;
    j["node"] = specs.at(step.node).name;
    j["phase"] = to_string(step.phase);
    j["action"] = to_string(step.action);
    j["candidate"] = names(specs, step.candidate);
    if (std::isfinite(step.statistic))
        j["statistic"] = step.statistic;
    else
        j["statistic"] = step.statistic > 0 ? "inf" : "-inf";
    j["dof"] = step.dof;
    j["independent"] = step.independent;
    j["parents_after"] = names(specs, step.parents_after);
    return j;
}

ordered_json to_json(const SearchTrace& trace, const Specs& specs) {
    ordered_json j;
    j["rule"] = trace.rule;
    j["evaluator"] = to_string(trace.evaluator);
    j["framing"] = to_string(trace.framing);
    ordered_json nodes = ordered_json::array();
    for (Var v = 0; v < trace.per_node.size(); ++v) {
        ordered_json node;
        node["node"] = specs.at(v).name;
        ordered_json steps = ordered_json::array();
        for (const SearchStep& s : trace.per_node[v]) steps.push_back(to_json(s, specs));
        node["steps"] = std::move(steps);
        nodes.push_back(std::move(node));
    }
    j["nodes"] = std::move(nodes);
    return j;
}

ordered_json to_json(const IdentityReport& report) {
    ordered_json j;
    j["identity"] = report.identity;
    j["instances"] = report.instances;
    if (std::isfinite(report.max_discrepancy))
        j["max_discrepancy"] = report.max_discrepancy;
    else
        j["max_discrepancy"] = "inf";
    j["tolerance"] = report.tolerance;
    j["pass"] = report.pass;
    return j;
}

ordered_json to_json(const DualSearchReport& report, const Specs& specs) {
    ordered_json j;
    j["rule"] = report.rule;
    j["evaluator"] = to_string(report.evaluator);
    j["structures_equal"] = report.structures_equal;
    j["steps_equal"] = report.steps_equal;
    j["steps_compared"] = report.steps_compared;
    j["max_step_discrepancy"] = report.max_step_discrepancy;
    j["tolerance"] = report.tolerance;
    j["pass"] = report.pass();
    ordered_json test_parents, score_parents;
    for (Var v = 0; v < report.test_parents.size(); ++v)
        test_parents[specs.at(v).name] = names(specs, report.test_parents[v]);
    for (Var v = 0; v < report.score_parents.size(); ++v)
        score_parents[specs.at(v).name] = names(specs, report.score_parents[v]);
    j["test_parents"] = std::move(test_parents);
    j["score_parents"] = std::move(score_parents);
    j["test_trace"] = to_json(report.test_trace, specs);
    j["score_trace"] = to_json(report.score_trace, specs);
    return j;
}

}  // namespace bnorder
