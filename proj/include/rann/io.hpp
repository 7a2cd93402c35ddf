#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "rann/bits.hpp"
#include "rann/common.hpp"

namespace rann {

/// Little-endian binary stream helpers. All index and dataset files go
/// through these so the layout is identical across platforms.
class BinWriter {
 public:
  explicit BinWriter(std::ostream& out) : out_(out) {}

  void u8(uint8_t v) { raw(&v, 1); }
  void u32(uint32_t v);
  void u64(uint64_t v);
  void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
  void f64(double v);
  void str(const std::string& s);
  void raw(const void* data, size_t len);

 private:
  std::ostream& out_;
};

class BinReader {
 public:
  explicit BinReader(std::istream& in) : in_(in) {}

  uint8_t u8();
  uint32_t u32();
  uint64_t u64();
  int64_t i64() { return static_cast<int64_t>(u64()); }
  double f64();
  std::string str();
  void raw(void* data, size_t len);

 private:
  std::istream& in_;
};

/// In-memory form of a dataset file: either real vectors or packed bits.
enum class ElemType : uint8_t { F64 = 0, F32 = 1, Bit = 2 };

struct Dataset {
  ElemType elem = ElemType::F64;
  std::vector<Point> real;  // F64/F32 payloads load as doubles
  BitMatrix bits;           // Bit payloads

  bool is_binary() const { return elem == ElemType::Bit; }
  int rows() const;
  int dim() const;
};

/// Dataset file: magic "RANN", version, element type, n, d, row-major
/// little-endian payload (bit rows pack into 64-bit words).
void write_dataset(std::ostream& out, const Dataset& ds);
Dataset read_dataset(std::istream& in);

void write_dataset_file(const std::string& path, const Dataset& ds);
Dataset read_dataset_file(const std::string& path);

/// One-line CSV of d cost values in [0, 1].
std::vector<double> read_costs_csv(const std::string& path);
void write_costs_csv(const std::string& path, const std::vector<double>& costs);

}  // namespace rann
