#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include "json.hpp"

#include "latdeconv/common.hpp"
#include "latdeconv/lattice.hpp"

namespace latdeconv {
namespace {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

constexpr double inline_box_limit = 1 << 24;

std::string encode_base64(const std::string& bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<std::string::const_iterator, 6, 8>>;
  std::string out(It(bytes.begin()), It(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

std::string decode_base64(std::string text) {
  using namespace boost::archive::iterators;
  using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  while (!text.empty() && text.back() == '=') text.pop_back();
  std::string out(It(text.begin()), It(text.end()));
  // transform_width may emit a trailing partial byte
  out.resize((text.size() * 6) / 8);
  return out;
}

std::string to_bytes(const std::vector<double>& v) {
  std::string s(v.size() * sizeof(double), '\0');
  std::memcpy(s.data(), v.data(), s.size());
  return s;
}

std::vector<double> from_bytes(const std::string& s) {
  if (s.size() % sizeof(double) != 0) throw PreconditionError("binary payload is not a float64 array");
  std::vector<double> v(s.size() / sizeof(double));
  std::memcpy(v.data(), s.data(), s.size());
  return v;
}

}  // namespace

void write_lattice_function(const LatticeFunction& f, const std::string& json_path,
                            bool inline_base64) {
  namespace fs = std::filesystem;
  const bool expand =
      f.layout() == Layout::box || std::pow(2.0 * f.radius() + 1.0, f.dim()) <= inline_box_limit;
  std::vector<double> data;
  if (expand) {
    const LatticeFunction b = f.to_box();
    data.assign(b.values().begin(), b.values().end());
  } else {
    data.assign(f.values().begin(), f.values().end());
  }
  nlohmann::json header;
  header["dimension"] = f.dim();
  header["radius"] = f.radius();
  header["symmetry_tag"] = to_string(f.symmetry_tag());
  header["order"] = expand ? "box" : "orbits";
  header["encoding"] = "float64-le";
  header["count"] = data.size();
  const std::string bytes = to_bytes(data);
  if (inline_base64) {
    header["data_base64"] = encode_base64(bytes);
  } else {
    fs::path bin = fs::path(json_path);
    bin.replace_extension(".f64");
    header["data_file"] = bin.filename().string();
    std::ofstream out(bin, std::ios::binary);
    if (!out) throw PreconditionError("cannot write " + bin.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  std::ofstream out(json_path);
  if (!out) throw PreconditionError("cannot write " + json_path);
  out << header.dump(2) << '\n';
}

LatticeFunction read_lattice_function(const std::string& json_path) {
  namespace fs = std::filesystem;
  std::ifstream in(json_path);
  if (!in) throw PreconditionError("cannot read " + json_path);
  const nlohmann::json header = nlohmann::json::parse(in);
  const int d = header.at("dimension").get<int>();
  const int R = header.at("radius").get<int>();
  const std::string order = header.value("order", "box");
  std::string bytes;
  if (header.contains("data_base64")) {
    bytes = decode_base64(header["data_base64"].get<std::string>());
  } else {
    const fs::path bin = fs::path(json_path).parent_path() / header.at("data_file").get<std::string>();
    std::ifstream b(bin, std::ios::binary);
    if (!b) throw PreconditionError("cannot read " + bin.string());
    bytes.assign(std::istreambuf_iterator<char>(b), std::istreambuf_iterator<char>());
  }
  const std::vector<double> data = from_bytes(bytes);
  LatticeFunction f = LatticeFunction::zeros(d, R, order == "orbits" ? Layout::orbits : Layout::box);
  if (data.size() != f.size()) throw PreconditionError("payload length does not match the header");
  for (double v : data)
    if (!std::isfinite(v)) throw PreconditionError("payload contains non-finite values");
  std::copy(data.begin(), data.end(), f.mutable_values().begin());
  const SymmetryTag tag = symmetry_tag_from_string(header.value("symmetry_tag", "none"));
  if (f.layout() == Layout::box && tag != SymmetryTag::none) f.set_symmetry_tag(tag);
  return f;
}

void write_csv(const LatticeFunction& f, std::ostream& out) {
  for (int j = 0; j < f.dim(); ++j) out << 'x' << j + 1 << ',';
  out << "value\n";
  out << std::setprecision(17);
  f.for_each([&](std::span<const int> x, double, double v) {
    for (int c : x) out << c << ',';
    out << v << '\n';
  });
}

}  // namespace latdeconv
