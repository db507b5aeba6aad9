#include "buggin/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "buggin/error.hpp"

namespace buggin {

namespace {

template <typename F>
void merge_rows(RowView a, RowView b, F&& f) {
  // f(x_a, x_b) is called for every column where either row is nonzero
  // (dense rows: every column).
  if (a.dense && b.dense) {
    for (std::size_t j = 0; j < a.values.size(); ++j) f(a.values[j], b.values[j]);
  } else if (a.dense) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < a.values.size(); ++j) {
      double vb = 0.0;
      if (k < b.indices.size() && b.indices[k] == j) vb = b.values[k++];
      f(a.values[j], vb);
    }
  } else if (b.dense) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < b.values.size(); ++j) {
      double va = 0.0;
      if (k < a.indices.size() && a.indices[k] == j) va = a.values[k++];
      f(va, b.values[j]);
    }
  } else {
    std::size_t i = 0, k = 0;
    while (i < a.indices.size() || k < b.indices.size()) {
      if (k >= b.indices.size() || (i < a.indices.size() && a.indices[i] < b.indices[k])) {
        f(a.values[i++], 0.0);
      } else if (i >= a.indices.size() || b.indices[k] < a.indices[i]) {
        f(0.0, b.values[k++]);
      } else {
        f(a.values[i++], b.values[k++]);
      }
    }
  }
}

}  // namespace

double dot(RowView a, RowView b) {
  if (a.dense && b.dense) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.values.size(); ++j) s += a.values[j] * b.values[j];
    return s;
  }
  if (!a.dense && b.dense) std::swap(a, b);
  if (a.dense) {
    double s = 0.0;
    for (std::size_t k = 0; k < b.indices.size(); ++k) s += a.values[b.indices[k]] * b.values[k];
    return s;
  }
  double s = 0.0;
  std::size_t i = 0, k = 0;
  while (i < a.indices.size() && k < b.indices.size()) {
    if (a.indices[i] < b.indices[k]) {
      ++i;
    } else if (b.indices[k] < a.indices[i]) {
      ++k;
    } else {
      s += a.values[i++] * b.values[k++];
    }
  }
  return s;
}

double squared_norm(RowView a) {
  double s = 0.0;
  for (double v : a.values) s += v * v;
  return s;
}

double squared_distance(RowView a, RowView b) {
  double s = 0.0;
  merge_rows(a, b, [&](double x, double y) { s += (x - y) * (x - y); });
  return s;
}

double manhattan_distance(RowView a, RowView b) {
  double s = 0.0;
  merge_rows(a, b, [&](double x, double y) { s += std::abs(x - y); });
  return s;
}

std::size_t FeatureMatrix::nnz() const {
  return storage_ == Storage::Sparse ? indices_.size() : values_.size();
}

RowView FeatureMatrix::row(std::size_t i) const {
  if (storage_ == Storage::Dense) {
    return RowView{{}, std::span<const double>(values_.data() + i * n_cols_, n_cols_), true};
  }
  const auto b = indptr_[i];
  const auto e = indptr_[i + 1];
  return RowView{std::span<const std::uint32_t>(indices_.data() + b, e - b),
                 std::span<const double>(values_.data() + b, e - b), false};
}

std::vector<double> FeatureMatrix::dense_row(std::size_t i) const {
  auto r = row(i);
  if (r.dense) return {r.values.begin(), r.values.end()};
  std::vector<double> out(n_cols_, 0.0);
  for (std::size_t k = 0; k < r.indices.size(); ++k) out[r.indices[k]] = r.values[k];
  return out;
}

double FeatureMatrix::at(std::size_t i, std::size_t j) const {
  auto r = row(i);
  if (r.dense) return r.values[j];
  auto it = std::lower_bound(r.indices.begin(), r.indices.end(), static_cast<std::uint32_t>(j));
  if (it == r.indices.end() || *it != j) return 0.0;
  return r.values[static_cast<std::size_t>(it - r.indices.begin())];
}

void FeatureMatrix::append_sparse(std::string id, int label, SparseEntries entries) {
  if (storage_ != Storage::Sparse) throw FormatError("append_sparse on a dense matrix");
  std::sort(entries.begin(), entries.end());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto j = entries[k].first;
    if (j >= n_cols_) throw DimensionError("column " + std::to_string(j) + " out of range for row " + id);
    if (k > 0 && entries[k - 1].first == j) throw FormatError("duplicate column in row " + id);
  }
  for (const auto& [j, v] : entries) {
    if (v == 0.0) continue;
    indices_.push_back(j);
    values_.push_back(v);
  }
  indptr_.push_back(indices_.size());
  row_ids_.push_back(std::move(id));
  labels_.push_back(label);
}

void FeatureMatrix::append_dense(std::string id, int label, std::span<const double> values) {
  if (storage_ != Storage::Dense) throw FormatError("append_dense on a sparse matrix");
  if (values.size() != n_cols_) {
    throw DimensionError("row " + id + " has " + std::to_string(values.size()) + " values, expected " +
                         std::to_string(n_cols_));
  }
  values_.insert(values_.end(), values.begin(), values.end());
  row_ids_.push_back(std::move(id));
  labels_.push_back(label);
}

void FeatureMatrix::append_row(std::string id, int label, RowView r) {
  if (storage_ == Storage::Dense) {
    if (r.dense) {
      append_dense(std::move(id), label, r.values);
    } else {
      std::vector<double> d(n_cols_, 0.0);
      for (std::size_t k = 0; k < r.indices.size(); ++k) d[r.indices[k]] = r.values[k];
      append_dense(std::move(id), label, d);
    }
    return;
  }
  SparseEntries e;
  if (r.dense) {
    for (std::size_t j = 0; j < r.values.size(); ++j) {
      if (r.values[j] != 0.0) e.emplace_back(static_cast<std::uint32_t>(j), r.values[j]);
    }
  } else {
    for (std::size_t k = 0; k < r.indices.size(); ++k) e.emplace_back(r.indices[k], r.values[k]);
  }
  append_sparse(std::move(id), label, std::move(e));
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  FeatureMatrix out(storage_, n_cols_);
  for (auto i : rows) {
    if (i >= n_rows()) throw DimensionError("row index " + std::to_string(i) + " out of range");
    out.append_row(row_ids_[i], labels_[i], row(i));
  }
  return out;
}

void FeatureMatrix::append_all(const FeatureMatrix& other) {
  if (other.storage_ != storage_ || other.n_cols_ != n_cols_) {
    throw DimensionError("cannot concatenate matrices of different layout");
  }
  for (std::size_t i = 0; i < other.n_rows(); ++i) append_row(other.row_ids_[i], other.labels_[i], other.row(i));
}

nlohmann::json FeatureMatrix::to_json() const {
  nlohmann::json j;
  j["schema"] = "buggin.matrix/1";
  j["storage"] = storage_ == Storage::Sparse ? "sparse" : "dense";
  j["n_rows"] = n_rows();
  j["n_cols"] = n_cols_;
  j["row_ids"] = row_ids_;
  j["labels"] = labels_;
  if (storage_ == Storage::Sparse) {
    j["indptr"] = indptr_;
    j["indices"] = indices_;
  }
  j["values"] = values_;
  return j;
}

FeatureMatrix FeatureMatrix::from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<std::string>() != "buggin.matrix/1") throw FormatError("unsupported matrix schema");
    const auto storage = j.at("storage").get<std::string>();
    FeatureMatrix m(storage == "dense" ? Storage::Dense : Storage::Sparse, j.at("n_cols").get<std::size_t>());
    if (storage != "dense" && storage != "sparse") throw FormatError("unknown storage '" + storage + "'");
    const auto ids = j.at("row_ids").get<std::vector<std::string>>();
    const auto labels = j.at("labels").get<std::vector<int>>();
    const auto values = j.at("values").get<std::vector<double>>();
    if (ids.size() != labels.size() || ids.size() != j.at("n_rows").get<std::size_t>()) {
      throw FormatError("matrix row_ids/labels/n_rows disagree");
    }
    if (m.storage_ == Storage::Dense) {
      if (values.size() != ids.size() * m.n_cols_) throw FormatError("dense matrix value count mismatch");
      for (std::size_t i = 0; i < ids.size(); ++i) {
        m.append_dense(ids[i], labels[i], std::span<const double>(values.data() + i * m.n_cols_, m.n_cols_));
      }
    } else {
      const auto indptr = j.at("indptr").get<std::vector<std::size_t>>();
      const auto indices = j.at("indices").get<std::vector<std::uint32_t>>();
      if (indptr.size() != ids.size() + 1 || indices.size() != values.size() || indptr.back() != values.size()) {
        throw FormatError("sparse matrix structure mismatch");
      }
      for (std::size_t i = 0; i < ids.size(); ++i) {
        SparseEntries e;
        for (auto k = indptr[i]; k < indptr[i + 1]; ++k) e.emplace_back(indices[k], values[k]);
        m.append_sparse(ids[i], labels[i], std::move(e));
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed matrix JSON: ") + e.what());
  }
}

ColumnMajor::ColumnMajor(const FeatureMatrix& m) : colptr(m.n_cols() + 1, 0) {
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    auto r = m.row(i);
    if (r.dense) {
      for (std::size_t j = 0; j < r.values.size(); ++j) {
        if (r.values[j] != 0.0) ++colptr[j + 1];
      }
    } else {
      for (auto j : r.indices) ++colptr[j + 1];
    }
  }
  for (std::size_t j = 0; j < m.n_cols(); ++j) colptr[j + 1] += colptr[j];
  rows.resize(colptr.back());
  values.resize(colptr.back());
  std::vector<std::size_t> fill(colptr.begin(), colptr.end() - 1);
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    auto r = m.row(i);
    auto put = [&](std::size_t j, double v) {
      rows[fill[j]] = static_cast<std::uint32_t>(i);
      values[fill[j]++] = v;
    };
    if (r.dense) {
      for (std::size_t j = 0; j < r.values.size(); ++j) {
        if (r.values[j] != 0.0) put(j, r.values[j]);
      }
    } else {
      for (std::size_t k = 0; k < r.indices.size(); ++k) put(r.indices[k], r.values[k]);
    }
  }
}

}  // namespace buggin
