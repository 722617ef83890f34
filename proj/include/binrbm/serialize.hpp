#pragma once

// Model files.
//
// Binary RBM1 block (all integers u64 and reals IEEE-754 binary64, little-endian):
//   "RBM1" m n weights[m*n row-major] visible_bias[m] hidden_bias[n]
//   learning_rate momentum epochs hidden_units weight_decay seed init_weight_scale
//
// Binary RBME1 ensemble:
//   "RBME1" count (class_id:i64 offset:f64){count} RBM1-block{count}
//
// Text RBM1 is line oriented with 17 significant digits, which also
// reproduces every finite double exactly.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "binrbm/classifier.hpp"
#include "binrbm/error.hpp"
#include "binrbm/rbm.hpp"

namespace binrbm {

inline constexpr char kRbmMagic[] = "RBM1";
inline constexpr char kEnsembleMagic[] = "RBME1";

struct RbmRecord {
  RbmParams params;
  TrainConfig config;
};

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t x) {
  char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((x >> (8 * k)) & 0xffu);
  out.write(bytes, 8);
}

inline void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw IoError("model file truncated");
  std::uint64_t x = 0;
  for (int k = 0; k < 8; ++k) x |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  return x;
}

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

inline void expect_magic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic)
    throw ValidationError("bad magic: expected '" + std::string(magic) + "'");
}

// Guards allocation against corrupt headers.
inline std::size_t checked_dim(std::uint64_t x) {
  if (x > (std::uint64_t{1} << 24)) throw ValidationError("model dimension implausibly large");
  return static_cast<std::size_t>(x);
}

}  // namespace detail

inline void write_rbm_binary(std::ostream& out, const RbmParams& params, const TrainConfig& config) {
  params.validate();
  out.write(kRbmMagic, 4);
  detail::put_u64(out, params.visible());
  detail::put_u64(out, params.hidden());
  for (double w : params.weights.data()) detail::put_f64(out, w);
  for (double c : params.visible_bias) detail::put_f64(out, c);
  for (double b : params.hidden_bias) detail::put_f64(out, b);
  detail::put_f64(out, config.learning_rate);
  detail::put_f64(out, config.momentum);
  detail::put_u64(out, config.epochs);
  detail::put_u64(out, config.hidden_units);
  detail::put_f64(out, config.weight_decay);
  detail::put_u64(out, config.seed);
  detail::put_f64(out, config.init_weight_scale);
}

inline RbmRecord read_rbm_binary(std::istream& in) {
  detail::expect_magic(in, kRbmMagic);
  const std::size_t m = detail::checked_dim(detail::get_u64(in));
  const std::size_t n = detail::checked_dim(detail::get_u64(in));
  RbmRecord rec{RbmParams::zeros(m, n), {}};
  for (double& w : rec.params.weights.data()) w = detail::get_f64(in);
  for (double& c : rec.params.visible_bias) c = detail::get_f64(in);
  for (double& b : rec.params.hidden_bias) b = detail::get_f64(in);
  rec.config.learning_rate = detail::get_f64(in);
  rec.config.momentum = detail::get_f64(in);
  rec.config.epochs = static_cast<unsigned>(detail::get_u64(in));
  rec.config.hidden_units = static_cast<unsigned>(detail::get_u64(in));
  rec.config.weight_decay = detail::get_f64(in);
  rec.config.seed = detail::get_u64(in);
  rec.config.init_weight_scale = detail::get_f64(in);
  return rec;
}

inline void write_rbm_text(std::ostream& out, const RbmParams& params, const TrainConfig& config) {
  params.validate();
  char buf[32];
  auto real = [&](double x) -> const char* {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  };
  auto line = [&](std::span<const double> xs) {
    for (std::size_t k = 0; k < xs.size(); ++k) out << (k ? " " : "") << real(xs[k]);
    out << '\n';
  };
  out << kRbmMagic << " text\n";
  out << "visible " << params.visible() << "\nhidden " << params.hidden() << '\n';
  out << "weights\n";
  for (std::size_t i = 0; i < params.visible(); ++i) line(params.weights.row(i));
  out << "visible_bias\n";
  line(params.visible_bias);
  out << "hidden_bias\n";
  line(params.hidden_bias);
  out << "learning_rate " << real(config.learning_rate) << '\n';
  out << "momentum " << real(config.momentum) << '\n';
  out << "epochs " << config.epochs << '\n';
  out << "hidden_units " << config.hidden_units << '\n';
  out << "weight_decay " << real(config.weight_decay) << '\n';
  out << "seed " << config.seed << '\n';
  out << "init_weight_scale " << real(config.init_weight_scale) << '\n';
}

inline RbmRecord read_rbm_text(std::istream& in) {
  auto expect = [&](const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) throw ValidationError("RBM1 text: expected '" + word + "'");
  };
  auto number = [&]<typename T>(T& x) {
    if (!(in >> x)) throw ValidationError("RBM1 text: malformed number");
  };
  expect(kRbmMagic);
  expect("text");
  std::uint64_t m = 0, n = 0;
  expect("visible");
  number(m);
  expect("hidden");
  number(n);
  RbmRecord rec{RbmParams::zeros(detail::checked_dim(m), detail::checked_dim(n)), {}};
  // strtod handles every %.17g token including subnormals; operator>> may not.
  auto real = [&](double& x) {
    std::string token;
    if (!(in >> token)) throw ValidationError("RBM1 text: truncated");
    char* end = nullptr;
    x = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) throw ValidationError("RBM1 text: bad real '" + token + "'");
  };
  expect("weights");
  for (double& w : rec.params.weights.data()) real(w);
  expect("visible_bias");
  for (double& c : rec.params.visible_bias) real(c);
  expect("hidden_bias");
  for (double& b : rec.params.hidden_bias) real(b);
  expect("learning_rate");
  real(rec.config.learning_rate);
  expect("momentum");
  real(rec.config.momentum);
  expect("epochs");
  number(rec.config.epochs);
  expect("hidden_units");
  number(rec.config.hidden_units);
  expect("weight_decay");
  real(rec.config.weight_decay);
  expect("seed");
  number(rec.config.seed);
  expect("init_weight_scale");
  real(rec.config.init_weight_scale);
  return rec;
}

inline void write_ensemble(std::ostream& out, const ClassEnsemble& ensemble) {
  ensemble.validate();
  out.write(kEnsembleMagic, 5);
  detail::put_u64(out, ensemble.classes.size());
  for (std::size_t c = 0; c < ensemble.classes.size(); ++c) {
    detail::put_u64(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(ensemble.classes[c])));
    detail::put_f64(out, ensemble.offsets[c]);
  }
  for (std::size_t c = 0; c < ensemble.classes.size(); ++c)
    write_rbm_binary(out, ensemble.models[c],
                     ensemble.configs.empty() ? TrainConfig{} : ensemble.configs[c]);
}

inline ClassEnsemble read_ensemble(std::istream& in) {
  detail::expect_magic(in, kEnsembleMagic);
  const std::uint64_t count = detail::get_u64(in);
  if (count > 1'000'000) throw ValidationError("RBME1: implausible class count");
  ClassEnsemble ensemble;
  for (std::uint64_t c = 0; c < count; ++c) {
    ensemble.classes.push_back(static_cast<int>(static_cast<std::int64_t>(detail::get_u64(in))));
    ensemble.offsets.push_back(detail::get_f64(in));
  }
  for (std::uint64_t c = 0; c < count; ++c) {
    RbmRecord rec = read_rbm_binary(in);
    ensemble.models.push_back(std::move(rec.params));
    ensemble.configs.push_back(rec.config);
  }
  ensemble.validate();
  return ensemble;
}

inline void save_ensemble(const ClassEnsemble& ensemble, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_ensemble(out, ensemble);
  if (!out) throw IoError("write error on '" + path + "'");
}

inline ClassEnsemble load_ensemble(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_ensemble(in);
}

}  // namespace binrbm
