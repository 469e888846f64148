#include "utrad/classify/feature_table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "utrad/common/csv.hpp"
#include "utrad/common/error.hpp"

namespace utrad::ml {

FeatureTable FeatureTable::select(const std::vector<std::size_t>& rows) const {
  FeatureTable out;
  out.columns = columns;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.keys.push_back(keys.at(rows[i]));
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

std::string format_feature_table(const FeatureTable& table) {
  csv::Row header(std::begin(kFeatureKeyColumns), std::end(kFeatureKeyColumns));
  header.insert(header.end(), table.columns.begin(), table.columns.end());
  std::string out = csv::join(header) + "\n";
  for (std::size_t r = 0; r < table.keys.size(); ++r) {
    const auto& k = table.keys[r];
    csv::Row row{k.patient_id, k.image_id, std::to_string(k.instance_label), k.instance_class,
                 k.source};
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
      row.push_back(csv::format_double(table.values(static_cast<Eigen::Index>(r), c)));
    }
    out += csv::join(row) + "\n";
  }
  return out;
}

FeatureTable parse_feature_table(std::string_view text) {
  const csv::Document doc = csv::parse(text);
  constexpr std::size_t nk = std::size(kFeatureKeyColumns);
  if (doc.header.size() <= nk) throw InputError("feature table has no feature columns");
  for (std::size_t i = 0; i < nk; ++i) {
    if (doc.header[i] != kFeatureKeyColumns[i]) {
      throw InputError("feature table column " + std::to_string(i + 1) + " must be '" +
                       kFeatureKeyColumns[i] + "', found '" + doc.header[i] + "'");
    }
  }
  FeatureTable t;
  t.columns.assign(doc.header.begin() + nk, doc.header.end());
  t.values.resize(static_cast<Eigen::Index>(doc.rows.size()), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& row = doc.rows[r];
    const std::string where = "feature table line " + std::to_string(doc.line_numbers[r]) + ": ";
    if (row.size() != doc.header.size()) throw InputError(where + "wrong field count");
    FeatureRowKey k;
    k.patient_id = row[0];
    k.image_id = row[1];
    unsigned label = 0;
    auto [p, ec] = std::from_chars(row[2].data(), row[2].data() + row[2].size(), label);
    if (ec != std::errc() || p != row[2].data() + row[2].size() || label == 0 || label > 65535) {
      throw InputError(where + "bad instance_label '" + row[2] + "'");
    }
    k.instance_label = static_cast<std::uint16_t>(label);
    k.instance_class = row[3];
    k.source = row[4];
    if (k.source != "manual" && k.source != "predicted") {
      throw InputError(where + "source must be manual or predicted");
    }
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const std::string& f = row[nk + c];
      double v = 0.0;
      auto [q, ec2] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec2 != std::errc() || q != f.data() + f.size() || !std::isfinite(v)) {
        throw InputError(where + "bad value '" + f + "' in column " + t.columns[c]);
      }
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
    t.keys.push_back(std::move(k));
  }
  return t;
}

FeatureTable read_feature_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read feature table: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_feature_table(ss.str());
}

}  // namespace utrad::ml
