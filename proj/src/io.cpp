#include "rann/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rann {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

void BinWriter::u32(uint32_t v) { raw(&v, sizeof v); }
void BinWriter::u64(uint64_t v) { raw(&v, sizeof v); }
void BinWriter::f64(double v) { raw(&v, sizeof v); }

void BinWriter::str(const std::string& s) {
  u64(s.size());
  raw(s.data(), s.size());
}

void BinWriter::raw(const void* data, size_t len) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
  if (!out_) throw DataError("write failed");
}

uint8_t BinReader::u8() {
  uint8_t v;
  raw(&v, 1);
  return v;
}

uint32_t BinReader::u32() {
  uint32_t v;
  raw(&v, sizeof v);
  return v;
}

uint64_t BinReader::u64() {
  uint64_t v;
  raw(&v, sizeof v);
  return v;
}

double BinReader::f64() {
  double v;
  raw(&v, sizeof v);
  return v;
}

std::string BinReader::str() {
  uint64_t len = u64();
  if (len > (1ULL << 32)) throw DataError("corrupt string length");
  std::string s(len, '\0');
  raw(s.data(), len);
  return s;
}

void BinReader::raw(void* data, size_t len) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
  if (static_cast<size_t>(in_.gcount()) != len) {
    throw DataError("unexpected end of file");
  }
}

namespace {

constexpr char kDatasetMagic[4] = {'R', 'A', 'N', 'N'};
constexpr uint32_t kDatasetVersion = 1;

}  // namespace

int Dataset::rows() const {
  return is_binary() ? bits.n : static_cast<int>(real.size());
}

int Dataset::dim() const {
  if (is_binary()) return bits.d;
  return real.empty() ? 0 : static_cast<int>(real.front().size());
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  BinWriter w(out);
  w.raw(kDatasetMagic, 4);
  w.u32(kDatasetVersion);
  w.u8(static_cast<uint8_t>(ds.elem));
  w.u64(static_cast<uint64_t>(ds.rows()));
  w.u32(static_cast<uint32_t>(ds.dim()));
  switch (ds.elem) {
    case ElemType::F64:
      for (const Point& pt : ds.real) {
        w.raw(pt.data(), pt.size() * sizeof(double));
      }
      break;
    case ElemType::F32:
      for (const Point& pt : ds.real) {
        for (double v : pt) {
          float f = static_cast<float>(v);
          w.raw(&f, sizeof f);
        }
      }
      break;
    case ElemType::Bit:
      w.raw(ds.bits.words.data(), ds.bits.words.size() * sizeof(uint64_t));
      break;
  }
}

Dataset read_dataset(std::istream& in) {
  BinReader r(in);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kDatasetMagic, 4) != 0) {
    throw DataError("not a dataset file (bad magic)");
  }
  uint32_t version = r.u32();
  if (version != kDatasetVersion) {
    throw DataError("unsupported dataset file version " +
                    std::to_string(version));
  }
  uint8_t elem = r.u8();
  uint64_t n = r.u64();
  uint32_t d = r.u32();
  if (elem > 2) throw DataError("unknown element type");
  if (n == 0) throw DataError("dataset file has no rows");

  Dataset ds;
  ds.elem = static_cast<ElemType>(elem);
  if (ds.elem == ElemType::Bit) {
    ds.bits = BitMatrix::zeros(static_cast<int>(n), static_cast<int>(d));
    r.raw(ds.bits.words.data(), ds.bits.words.size() * sizeof(uint64_t));
  } else {
    ds.real.assign(n, Point(d));
    for (Point& pt : ds.real) {
      if (ds.elem == ElemType::F64) {
        r.raw(pt.data(), pt.size() * sizeof(double));
      } else {
        for (double& v : pt) {
          float f;
          r.raw(&f, sizeof f);
          v = f;
        }
      }
      check_finite(pt);
    }
  }
  return ds;
}

void write_dataset_file(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  write_dataset(out, ds);
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  return read_dataset(in);
}

std::vector<double> read_costs_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty cost file: " + path);
  std::vector<double> costs;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      costs.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw DataError("bad cost value '" + cell + "' in " + path);
    }
  }
  if (costs.empty()) throw DataError("no cost values in " + path);
  for (double c : costs) {
    if (!(c >= 0.0 && c <= 1.0)) throw DataError("cost outside [0, 1]");
  }
  return costs;
}

void write_costs_csv(const std::string& path, const std::vector<double>& costs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out.precision(17);
  for (size_t i = 0; i < costs.size(); ++i) {
    if (i) out << ',';
    out << costs[i];
  }
  out << '\n';
}

}  // namespace rann
