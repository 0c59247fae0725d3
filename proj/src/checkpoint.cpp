#include "pronsim/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pronsim {

namespace {

constexpr char kMagic[4] = {'P', 'S', 'C', 'K'};

struct Writer {
  std::ofstream out;
  explicit Writer(const std::string& path)
      : out(path, std::ios::binary | std::ios::trunc) {
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
  }
  void bytes(const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    bytes(b, 4);
  }
  void u64(std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    bytes(b, 8);
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void tensor(const std::string& name, const Tensor& t) {
    str(name);
    u32(static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) u64(d);
    for (double v : t.data) f64(v);
  }
};

struct Reader {
  std::ifstream in;
  std::string path;
  explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw std::runtime_error("cannot open checkpoint: " + p);
  }
  void bytes(void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
      throw std::runtime_error("truncated checkpoint: " + path);
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint8_t b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint8_t b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
    return v;
  }
  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    if (n) bytes(s.data(), n);
    return s;
  }
  void tensor(const std::string& expect_name, Tensor& t) {
    const std::string name = str();
    if (name != expect_name)
      throw std::runtime_error("checkpoint parameter order mismatch: expected " +
                               expect_name + ", found " + name);
    const std::uint32_t ndim = u32();
    std::vector<std::size_t> shape(ndim);
    for (auto& d : shape) d = static_cast<std::size_t>(u64());
    if (shape != t.shape)
      throw std::runtime_error("checkpoint shape mismatch for " + name);
    for (double& v : t.data) v = f64();
  }
};

void write_header(Writer& w, const std::string& arch, const EncoderConfig& cfg,
                  std::size_t inventory_size, std::uint64_t inv_hash) {
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.str(arch);
  w.u64(cfg.phone_embed_dim);
  w.u64(cfg.hidden_dim);
  w.u32(static_cast<std::uint32_t>(cfg.num_layers));
  w.u8(cfg.bidirectional ? 1 : 0);
  w.u64(inventory_size);
  w.u64(inv_hash);
}

struct Header {
  std::string arch;
  EncoderConfig cfg;
  std::size_t inventory_size = 0;
  std::uint64_t inv_hash = 0;
};

Header read_header(Reader& r) {
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + r.path);
  const std::uint32_t ver = r.u32();
  if (ver != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(ver));
  Header h;
  h.arch = r.str();
  h.cfg.phone_embed_dim = static_cast<std::size_t>(r.u64());
  h.cfg.hidden_dim = static_cast<std::size_t>(r.u64());
  h.cfg.num_layers = static_cast<int>(r.u32());
  h.cfg.bidirectional = r.u8() != 0;
  h.inventory_size = static_cast<std::size_t>(r.u64());
  h.inv_hash = r.u64();
  return h;
}

template <typename Model>
void write_params(Writer& w, Model& model) {
  auto ps = model.params();
  w.u32(static_cast<std::uint32_t>(ps.size()));
  for (Parameter* p : ps) w.tensor(p->name, p->value);
}

template <typename Model>
void read_params(Reader& r, Model& model) {
  auto ps = model.params();
  const std::uint32_t n = r.u32();
  if (n != ps.size())
    throw std::runtime_error("checkpoint parameter count mismatch");
  for (Parameter* p : ps) r.tensor(p->name, p->value);
}

void check_hash(std::uint64_t stored, std::uint64_t expected) {
  if (stored != expected)
    throw std::runtime_error(
        "checkpoint was trained against a different phone inventory");
}

}  // namespace

void save_checkpoint(const std::string& path, const RankModel& model,
                     std::uint64_t inventory_hash) {
  Writer w(path);
  write_header(w, "rank", model.enc.cfg, model.enc.inventory_size,
               inventory_hash);
  w.u64(model.embed_dim);
  w.u8(model.final_relu ? 1 : 0);
  write_params(w, const_cast<RankModel&>(model));
  if (!w.out) throw std::runtime_error("write failed: " + path);
}

void save_checkpoint(const std::string& path, const BinaryModel& model,
                     std::uint64_t inventory_hash) {
  Writer w(path);
  write_header(w, "binary", model.enc.cfg, model.enc.inventory_size,
               inventory_hash);
  w.u64(model.t_max);
  w.u64(model.step_dim);
  w.u8(1);  // positive class index: label +1 maps to softmax class 1
  write_params(w, const_cast<BinaryModel&>(model));
  if (!w.out) throw std::runtime_error("write failed: " + path);
}

ArchTag peek_checkpoint_arch(const std::string& path) {
  Reader r(path);
  const Header h = read_header(r);
  if (h.arch == "rank") return ArchTag::Rank;
  if (h.arch == "binary") return ArchTag::Binary;
  throw std::runtime_error("unknown architecture tag: " + h.arch);
}

RankModel load_rank_checkpoint(const std::string& path,
                               std::uint64_t expected_inventory_hash) {
  Reader r(path);
  const Header h = read_header(r);
  if (h.arch != "rank")
    throw std::runtime_error("checkpoint is not a rank model: " + path);
  check_hash(h.inv_hash, expected_inventory_hash);
  const std::size_t embed_dim = static_cast<std::size_t>(r.u64());
  const bool final_relu = r.u8() != 0;
  Rng rng(0);
  RankModel m =
      RankModel::init(h.cfg, h.inventory_size, embed_dim, final_relu, rng);
  read_params(r, m);
  return m;
}

BinaryModel load_binary_checkpoint(const std::string& path,
                                   std::uint64_t expected_inventory_hash) {
  Reader r(path);
  const Header h = read_header(r);
  if (h.arch != "binary")
    throw std::runtime_error("checkpoint is not a binary model: " + path);
  check_hash(h.inv_hash, expected_inventory_hash);
  const std::size_t t_max = static_cast<std::size_t>(r.u64());
  const std::size_t step_dim = static_cast<std::size_t>(r.u64());
  const std::uint8_t positive_class = r.u8();
  if (positive_class != 1)
    throw std::runtime_error("unsupported class mapping in checkpoint");
  Rng rng(0);
  BinaryModel m = BinaryModel::init(h.cfg, h.inventory_size, t_max, step_dim, rng);
  read_params(r, m);
  return m;
}

}  // namespace pronsim
