#include "cpgd/blocks.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cpgd {

BlockPartition BlockPartition::contiguous(std::size_t n, std::span<const std::size_t> sizes) {
  if (sizes.empty()) {
    throw std::invalid_argument("block partition needs at least one block");
  }
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (total != n) {
    throw std::invalid_argument("block sizes sum to " + std::to_string(total) +
                                " but the dimension is " + std::to_string(n));
  }
  BlockPartition p;
  p.n_ = n;
  std::size_t start = 0;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    if (sizes[b] == 0) {
      throw std::invalid_argument("block " + std::to_string(b) + " is empty");
    }
    std::vector<std::size_t> idx(sizes[b]);
    std::iota(idx.begin(), idx.end(), start);
    p.offsets_.push_back(start);
    p.blocks_.push_back(std::move(idx));
    start += sizes[b];
  }
  p.contiguous_ = true;
  return p;
}

BlockPartition BlockPartition::from_indices(std::size_t n,
                                            std::vector<std::vector<std::size_t>> blocks) {
  if (blocks.empty()) {
    throw std::invalid_argument("block partition needs at least one block");
  }
  std::vector<char> seen(n, 0);
  std::size_t covered = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& idx = blocks[b];
    if (idx.empty()) {
      throw std::invalid_argument("block " + std::to_string(b) + " is empty");
    }
    std::sort(idx.begin(), idx.end());
    for (std::size_t j : idx) {
      if (j >= n) {
        throw std::invalid_argument("index " + std::to_string(j) + " in block " +
                                    std::to_string(b) + " is outside [0, " + std::to_string(n) +
                                    ")");
      }
      if (seen[j]) {
        throw std::invalid_argument("index " + std::to_string(j) + " appears in two blocks");
      }
      seen[j] = 1;
      ++covered;
    }
  }
  if (covered != n) {
    throw std::invalid_argument("blocks cover " + std::to_string(covered) + " of " +
                                std::to_string(n) + " coordinates");
  }

  BlockPartition p;
  p.n_ = n;
  p.blocks_ = std::move(blocks);
  std::size_t expected = 0;
  p.contiguous_ = true;
  for (const auto& idx : p.blocks_) {
    p.offsets_.push_back(idx.front());
    if (idx.front() != expected || idx.back() != expected + idx.size() - 1) {
      p.contiguous_ = false;
    }
    expected += idx.size();
  }
  return p;
}

void BlockPartition::check_index(std::size_t i) const {
  if (i >= blocks_.size()) {
    throw std::out_of_range("block index " + std::to_string(i) + " out of range for " +
                            std::to_string(blocks_.size()) + " blocks");
  }
}

std::size_t BlockPartition::block_size(std::size_t i) const {
  check_index(i);
  return blocks_[i].size();
}

const std::vector<std::size_t>& BlockPartition::indices(std::size_t i) const {
  check_index(i);
  return blocks_[i];
}

std::size_t BlockPartition::offset(std::size_t i) const {
  check_index(i);
  return offsets_[i];
}

BlockPartition make_partition(std::size_t n, std::span<const std::size_t> sizes) {
  return BlockPartition::contiguous(n, sizes);
}

BlockPartition make_partition(std::size_t n, std::initializer_list<std::size_t> sizes) {
  return BlockPartition::contiguous(n, std::span<const std::size_t>(sizes.begin(), sizes.size()));
}

Vector extract_block(const Point& x, std::size_t i, const BlockPartition& partition) {
  const auto& idx = partition.indices(i);
  if (static_cast<std::size_t>(x.size()) != partition.dimension()) {
    throw std::invalid_argument("point dimension does not match the partition");
  }
  if (partition.is_contiguous()) {
    return x.segment(static_cast<Eigen::Index>(partition.offset(i)),
                     static_cast<Eigen::Index>(idx.size()));
  }
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out[static_cast<Eigen::Index>(j)] = x[static_cast<Eigen::Index>(idx[j])];
  }
  return out;
}

void assign_block(Point& x, std::size_t i, const Vector& v, const BlockPartition& partition) {
  const auto& idx = partition.indices(i);
  if (static_cast<std::size_t>(x.size()) != partition.dimension()) {
    throw std::invalid_argument("point dimension does not match the partition");
  }
  if (static_cast<std::size_t>(v.size()) != idx.size()) {
    throw std::invalid_argument("block " + std::to_string(i) + " has size " +
                                std::to_string(idx.size()) + " but the value has size " +
                                std::to_string(v.size()));
  }
  if (partition.is_contiguous()) {
    x.segment(static_cast<Eigen::Index>(partition.offset(i)), v.size()) = v;
    return;
  }
  for (std::size_t j = 0; j < idx.size(); ++j) {
    x[static_cast<Eigen::Index>(idx[j])] = v[static_cast<Eigen::Index>(j)];
  }
}

Point scatter_block(Point x, std::size_t i, const Vector& v, const BlockPartition& partition) {
  assign_block(x, i, v, partition);
  return x;
}

}  // namespace cpgd
