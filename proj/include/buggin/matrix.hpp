#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace buggin {

enum class Storage { Sparse, Dense };

// Read-only view of one row. Dense rows carry no indices and n_cols values;
// sparse rows carry strictly increasing column indices.
struct RowView {
  std::span<const std::uint32_t> indices;
  std::span<const double> values;
  bool dense = false;
};

double dot(RowView a, RowView b);
double squared_norm(RowView a);
double squared_distance(RowView a, RowView b);
double manhattan_distance(RowView a, RowView b);

using SparseEntries = std::vector<std::pair<std::uint32_t, double>>;

// Row-aligned features plus ids and 0/1 labels. Sparse storage is CSR.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(Storage storage, std::size_t n_cols) : storage_(storage), n_cols_(n_cols) {}

  Storage storage() const { return storage_; }
  std::size_t n_rows() const { return row_ids_.size(); }
  std::size_t n_cols() const { return n_cols_; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  const std::vector<int>& labels() const { return labels_; }
  std::size_t nnz() const;

  RowView row(std::size_t i) const;
  std::vector<double> dense_row(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;

  // Sparse entries need not be sorted; zeros are dropped and duplicate
  // columns rejected.
  void append_sparse(std::string id, int label, SparseEntries entries);
  void append_dense(std::string id, int label, std::span<const double> values);
  // Appends a row given in either layout, converting to this matrix's storage.
  void append_row(std::string id, int label, RowView row);

  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  // Rows of `other` appended after this matrix's rows. Storage and width
  // must agree.
  void append_all(const FeatureMatrix& other);

  nlohmann::json to_json() const;
  static FeatureMatrix from_json(const nlohmann::json& j);

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  Storage storage_ = Storage::Sparse;
  std::size_t n_cols_ = 0;
  std::vector<std::string> row_ids_;
  std::vector<int> labels_;
  // sparse
  std::vector<std::size_t> indptr_{0};
  std::vector<std::uint32_t> indices_;
  // shared value buffer (CSR values, or row-major dense values)
  std::vector<double> values_;
};

// Column-major copy of the nonzeros, for coordinate-wise solvers.
struct ColumnMajor {
  std::vector<std::size_t> colptr;
  std::vector<std::uint32_t> rows;
  std::vector<double> values;

  explicit ColumnMajor(const FeatureMatrix& m);
};

}  // namespace buggin
