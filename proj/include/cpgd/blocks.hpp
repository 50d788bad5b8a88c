#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace cpgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A point of R^n. Block views are taken through a BlockPartition.
using Point = Vector;

/// Ordered decomposition of {0..n-1} into N disjoint, nonempty index blocks.
///
/// Blocks are visited in declaration order by the cyclic solvers. Indices
/// inside a block are kept in ascending order, so gather/scatter are
/// deterministic regardless of how the partition was specified.
/// Block indices are zero-based throughout the library.
class BlockPartition {
 public:
  /// Contiguous blocks in declaration order. Throws std::invalid_argument
  /// when a size is zero or the sizes do not sum to n.
  static BlockPartition contiguous(std::size_t n, std::span<const std::size_t> sizes);

  /// Arbitrary (permuted) blocks. Each block is sorted ascending; the blocks
  /// must be nonempty, pairwise disjoint and cover {0..n-1}.
  static BlockPartition from_indices(std::size_t n, std::vector<std::vector<std::size_t>> blocks);

  std::size_t dimension() const { return n_; }
  std::size_t num_blocks() const { return blocks_.size(); }
  std::size_t block_size(std::size_t i) const;
  const std::vector<std::size_t>& indices(std::size_t i) const;

  // Contiguous partitions expose block i as the segment [offset(i), offset(i)+size).
  bool is_contiguous() const { return contiguous_; }
  std::size_t offset(std::size_t i) const;

  friend bool operator==(const BlockPartition&, const BlockPartition&) = default;

 private:
  BlockPartition() = default;
  void check_index(std::size_t i) const;

  std::size_t n_ = 0;
  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<std::size_t> offsets_;
  bool contiguous_ = true;
};

BlockPartition make_partition(std::size_t n, std::span<const std::size_t> sizes);
BlockPartition make_partition(std::size_t n, std::initializer_list<std::size_t> sizes);

/// x^(i): the coordinates of block i, in block-internal order.
Vector extract_block(const Point& x, std::size_t i, const BlockPartition& partition);

/// Returns x with block i replaced by v.
Point scatter_block(Point x, std::size_t i, const Vector& v, const BlockPartition& partition);

/// In-place variant used by the solver's inner loop.
void assign_block(Point& x, std::size_t i, const Vector& v, const BlockPartition& partition);

}  // namespace cpgd
