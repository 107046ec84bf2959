#pragma once

#include <cstdint>

namespace cachesim {

inline bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

// v must be a power of two.
uint32_t log2_u64(uint64_t v);

struct CacheGeometry {
  uint64_t size_bytes = 0;
  uint32_t assoc = 0;
  uint32_t block_bytes = 0;
  uint32_t page_bytes = 0;
  uint32_t address_bits = 45;
  uint64_t sets = 0;      // size_bytes / (assoc * block_bytes)
  uint32_t tag_bits = 0;  // address_bits - log2(sets) - log2(block_bytes)

  uint64_t total_blocks() const { return sets * assoc; }
  uint32_t block_bits() const { return block_bytes * 8; }
  // Blocks per page; equal to the number of sets per color.
  uint32_t blocks_per_page() const { return page_bytes / block_bytes; }
  // Number of valid block addresses under this address width.
  uint64_t block_addr_space() const;
};

CacheGeometry derive_geometry(uint64_t size_bytes, uint32_t assoc, uint32_t block_bytes,
                              uint32_t page_bytes, uint32_t address_bits = 45);

}  // namespace cachesim
