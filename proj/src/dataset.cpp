#include "scenex/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace scenex {

void LabeledDataset::validate() const {
    for (const auto& row : rows)
        if (row.size() != feature_names.size())
            throw ValidationError("dataset row width does not match feature names");
    if (!labels.empty()) {
        if (labels.size() != rows.size())
            throw ValidationError("dataset labels and rows must have the same length");
        for (int l : labels)
            if (l < 0 || l >= static_cast<int>(class_names.size()))
                throw ValidationError("dataset label index out of range");
    }
}

std::vector<std::int64_t> LabeledDataset::class_counts() const {
    std::vector<std::int64_t> counts(class_names.size(), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    return counts;
}

LabeledDataset select_columns(const LabeledDataset& data, const std::vector<int>& columns) {
    LabeledDataset out;
    out.labels = data.labels;
    out.class_names = data.class_names;
    out.feature_names.reserve(columns.size());
    for (int c : columns) {
        if (c < 0 || c >= data.width()) throw ValidationError("select_columns: column index out of range");
        out.feature_names.push_back(data.feature_names[static_cast<std::size_t>(c)]);
    }
    out.rows.reserve(data.rows.size());
    for (const auto& row : data.rows) {
        std::vector<double> r;
        r.reserve(columns.size());
        for (int c : columns) r.push_back(row[static_cast<std::size_t>(c)]);
        out.rows.push_back(std::move(r));
    }
    return out;
}

void save_feature_csv(const LabeledDataset& data, const std::filesystem::path& path) {
    data.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    for (std::size_t i = 0; i < data.feature_names.size(); ++i) {
        if (i) out << ',';
        out << data.feature_names[i];
    }
    if (data.labeled()) out << ",label";
    out << '\n';
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
        for (std::size_t i = 0; i < data.rows[r].size(); ++i) {
            if (i) out << ',';
            out << format_double(data.rows[r][i]);
        }
        if (data.labeled()) out << ',' << data.class_names[static_cast<std::size_t>(data.labels[r])];
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

LabeledDataset load_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty feature CSV: " + path.string());
    std::vector<std::string> header = split_csv_line(line);
    bool labeled = !header.empty() && header.back() == "label";

    LabeledDataset data;
    data.feature_names.assign(header.begin(), labeled ? header.end() - 1 : header.end());
    if (data.feature_names.empty()) throw ValidationError("feature CSV has no feature columns");

    std::vector<std::string> label_text;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ValidationError("feature CSV row " + std::to_string(line_no) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(data.feature_names.size());
        for (std::size_t i = 0; i < data.feature_names.size(); ++i) row.push_back(parse_double(fields[i]));
        data.rows.push_back(std::move(row));
        if (labeled) label_text.push_back(fields.back());
    }
    if (labeled) {
        std::vector<std::string> names = label_text;
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        data.class_names = names;
        data.labels.reserve(label_text.size());
        for (const std::string& t : label_text) {
            auto it = std::lower_bound(names.begin(), names.end(), t);
            data.labels.push_back(static_cast<int>(it - names.begin()));
        }
    }
    data.validate();
    return data;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int n_classes, int folds,
                                  std::uint64_t seed) {
    if (folds < 2) throw ValidationError("stratified_folds: need at least 2 folds");
    if (labels.empty()) throw ValidationError("stratified_folds: no rows");
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes)
            throw ValidationError("stratified_folds: label out of range");
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (int c = 0; c < n_classes; ++c) {
        if (static_cast<int>(by_class[static_cast<std::size_t>(c)].size()) < folds)
            throw ValidationError("stratified_folds: class " + std::to_string(c) + " has " +
                                  std::to_string(by_class[static_cast<std::size_t>(c)].size()) +
                                  " rows, fewer than " + std::to_string(folds) + " folds");
    }
    Rng rng(seed);
    std::vector<int> fold_of(labels.size(), 0);
    for (auto& group : by_class) {
        rng.shuffle(group);
        for (std::size_t i = 0; i < group.size(); ++i)
            fold_of[group[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }
    return fold_of;
}

}  // namespace scenex
