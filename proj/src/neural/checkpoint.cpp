#include "hcn/neural/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include <fmt/format.h>

#include "hcn/util/error.hpp"
#include "hcn/util/io.hpp"

namespace hcn::neural {
namespace {

constexpr std::string_view kMagic = "HCN1";
constexpr std::uint64_t kMaxDimension = 1u << 24;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

void put_tensors(std::string& out, const LstmTensors& t) {
  t.for_each([&](const auto& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  });
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::uint8_t byte() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void tensors(LstmTensors& t) {
    t.for_each([&](auto& m) {
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = f64();
    });
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw DataError("checkpoint is truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const LstmParameters& params, const AdaDeltaState* optimizer) {
  validate(params);
  std::string out(kMagic);
  put_u64(out, params.shape.obs_size);
  put_u64(out, params.shape.action_count);
  put_u64(out, params.shape.hidden);
  put_tensors(out, params.tensors);
  if (optimizer) {
    out.push_back(1);
    put_f64(out, optimizer->rho);
    put_f64(out, optimizer->epsilon);
    put_tensors(out, optimizer->grad_sq_avg);
    put_tensors(out, optimizer->update_sq_avg);
  } else {
    out.push_back(0);
  }
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kMagic.size()) != kMagic) throw DataError("not an HCN1 checkpoint");
  LstmShape shape;
  shape.obs_size = in.u64();
  shape.action_count = in.u64();
  shape.hidden = in.u64();
  if (shape.obs_size == 0 || shape.action_count == 0 || shape.hidden == 0 ||
      shape.obs_size > kMaxDimension || shape.action_count > kMaxDimension ||
      shape.hidden > kMaxDimension)
    throw DataError(fmt::format("implausible checkpoint dimensions ({}, {}, {})",
                                shape.obs_size, shape.action_count, shape.hidden));
  Checkpoint ck;
  ck.params.shape = shape;
  ck.params.tensors = LstmTensors::zeros(shape);
  in.tensors(ck.params.tensors);
  const auto flag = in.byte();
  if (flag == 1) {
    const double rho = in.f64();
    const double eps = in.f64();
    auto opt = AdaDeltaState::zeros(shape, rho, eps);
    in.tensors(opt.grad_sq_avg);
    in.tensors(opt.update_sq_avg);
    ck.optimizer = std::move(opt);
  } else if (flag != 0) {
    throw DataError(fmt::format("unknown checkpoint flag byte {}", flag));
  }
  if (!in.at_end()) throw DataError("trailing bytes after checkpoint");
  validate(ck.params);
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const LstmParameters& params,
                     const AdaDeltaState* optimizer) {
  io::write_file_atomic(path, serialize_checkpoint(params, optimizer));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(io::read_file(path));
}

}  // namespace hcn::neural
