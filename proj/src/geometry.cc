#include "cachesim/geometry.hh"

#include <string>

#include "cachesim/errors.hh"

namespace cachesim {

uint32_t log2_u64(uint64_t v) {
  CS_CHECK(is_pow2(v), "log2_u64 on non-power-of-two");
  uint32_t r = 0;
  while (v > 1) {
    v >>= 1;
    ++r;
  }
  return r;
}

uint64_t CacheGeometry::block_addr_space() const {
  return uint64_t(1) << (address_bits - log2_u64(block_bytes));
}

CacheGeometry derive_geometry(uint64_t size_bytes, uint32_t assoc, uint32_t block_bytes,
                              uint32_t page_bytes, uint32_t address_bits) {
  if (!is_pow2(size_bytes) || !is_pow2(assoc) || !is_pow2(block_bytes) || !is_pow2(page_bytes))
    throw ConfigError("cache geometry inputs must be positive powers of two");
  if (page_bytes < block_bytes) throw ConfigError("page_bytes must be >= block_bytes");
  uint64_t line_bytes = uint64_t(assoc) * block_bytes;
  if (size_bytes % line_bytes != 0 || size_bytes < line_bytes)
    throw ConfigError("assoc * block_bytes must divide size_bytes");

  CacheGeometry g;
  g.size_bytes = size_bytes;
  g.assoc = assoc;
  g.block_bytes = block_bytes;
  g.page_bytes = page_bytes;
  g.address_bits = address_bits;
  g.sets = size_bytes / line_bytes;
  uint32_t set_bits = log2_u64(g.sets);
  uint32_t block_off_bits = log2_u64(block_bytes);
  if (address_bits <= set_bits + block_off_bits || address_bits > 64)
    throw ConfigError("address_bits too small for geometry: " + std::to_string(address_bits));
  g.tag_bits = address_bits - set_bits - block_off_bits;
  return g;
}

}  // namespace cachesim
