#include "tpflow/tpf_io.hpp"

#include "tpflow/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tpflow {

static_assert(std::endian::native == std::endian::little, "TPF1 I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'T', 'P', 'F', '1'};
constexpr std::size_t kHeaderBytes = 4 + 5 * 8 + 4 * 8;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw ValidationError("TPF1: truncated file");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::string header(const SpaceTimeGrid& g, std::int64_t kind, int components, int layers) {
  std::string out(kMagic, 4);
  put<std::int64_t>(out, kind);
  put<std::int64_t>(out, g.n_space);
  put<std::int64_t>(out, g.n_time_modes);
  put<std::int64_t>(out, components);
  put<std::int64_t>(out, layers);
  put<double>(out, g.box_half_length);
  put<double>(out, g.period);
  put<double>(out, g.viscosity);
  put<double>(out, g.kappa);
  return out;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ValidationError("cannot open " + tmp.string() + " for writing");
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!os) throw ValidationError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string encode_tpf(const RealField& f) {
  std::string out = header(f.grid(), 0, f.components(), f.layers());
  out.reserve(out.size() + f.size() * 8);
  for (double v : f.values()) put<double>(out, v);
  return out;
}

std::string encode_tpf(const SpectralField& s) {
  std::string out = header(s.grid(), 1, s.components(), s.layers());
  out.reserve(out.size() + s.values().size() * 16);
  for (const cplx& v : s.values()) {
    put<double>(out, v.real());
    put<double>(out, v.imag());
  }
  return out;
}

std::variant<RealField, SpectralField> decode_tpf(const std::string& bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ValidationError("TPF1: bad magic or short header");
  std::size_t pos = 4;
  const auto kind = get<std::int64_t>(bytes, pos);
  SpaceTimeGrid g;
  g.n_space = static_cast<int>(get<std::int64_t>(bytes, pos));
  g.n_time_modes = static_cast<int>(get<std::int64_t>(bytes, pos));
  const auto components = get<std::int64_t>(bytes, pos);
  const auto layers = get<std::int64_t>(bytes, pos);
  g.box_half_length = get<double>(bytes, pos);
  g.period = get<double>(bytes, pos);
  g.viscosity = get<double>(bytes, pos);
  g.kappa = get<double>(bytes, pos);
  g.validate();
  if (components < 1 || components > 64) throw ValidationError("TPF1: bad component count");
  if (layers != 1 && layers != g.n_time()) throw ValidationError("TPF1: bad layer count");
  const std::size_t count = static_cast<std::size_t>(components) * layers * g.n_points();
  if (kind == 0) {
    if (bytes.size() != kHeaderBytes + count * 8) throw ValidationError("TPF1: payload size mismatch");
    RealField f(g, static_cast<int>(components), static_cast<int>(layers));
    for (double& v : f.values()) v = get<double>(bytes, pos);
    return f;
  }
  if (kind == 1) {
    if (bytes.size() != kHeaderBytes + count * 16) throw ValidationError("TPF1: payload size mismatch");
    SpectralField s(g, static_cast<int>(components), static_cast<int>(layers));
    for (cplx& v : s.values()) {
      const double re = get<double>(bytes, pos);
      v = cplx(re, get<double>(bytes, pos));
    }
    return s;
  }
  throw ValidationError("TPF1: unknown kind " + std::to_string(kind));
}

void write_tpf(const std::filesystem::path& path, const RealField& f) {
  write_file_atomic(path, encode_tpf(f));
}

void write_tpf(const std::filesystem::path& path, const SpectralField& s) {
  write_file_atomic(path, encode_tpf(s));
}

std::variant<RealField, SpectralField> read_tpf(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return decode_tpf(ss.str());
}

}  // namespace tpflow
