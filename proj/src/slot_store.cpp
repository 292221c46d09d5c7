#include "wavefield/slot_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "wavefield/error.hpp"
#include "wavefield/random.hpp"

namespace wavefield {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace store_format {
fs::path segment_path(const fs::path& dir, std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "segment-%06zu.wfld", index);
  return dir / name;
}
}  // namespace store_format

namespace {

using store_format::kHeaderSize;
using store_format::record_size;

constexpr std::size_t kScanChunk = 2048;

void put_le(std::uint8_t* out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_le(const std::uint8_t* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

float get_f32(const std::uint8_t* p) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(get_le(p, 4)));
}

std::array<std::uint8_t, kHeaderSize> encode_header(std::size_t dim, std::uint64_t count,
                                                    Kernel kernel) {
  std::array<std::uint8_t, kHeaderSize> h{};
  std::memcpy(h.data(), store_format::kMagic, 4);
  put_le(h.data() + 4, store_format::kVersion, 2);
  put_le(h.data() + 6, dim, 4);
  put_le(h.data() + 10, count, 8);
  h[18] = static_cast<std::uint8_t>(kernel);
  return h;
}

// Appends one record; returns false if 32-bit rounding left no energy.
bool encode_record(std::vector<std::uint8_t>& out, std::uint64_t id, const WavePattern& p) {
  const std::size_t dim = p.dim();
  const std::size_t base = out.size();
  out.resize(base + record_size(dim), 0);
  std::uint8_t* rec = out.data() + base;
  put_le(rec, id, 8);
  bool any = false;
  for (std::size_t i = 0; i < dim; ++i) {
    const float a = static_cast<float>(p.amplitude()[i]);
    float ph = a == 0.0f ? 0.0f : static_cast<float>(p.phase()[i]);
    // float(φ) for φ just below 2π can round up to 2π itself.
    if (static_cast<double>(ph) >= kTwoPi) ph = 0.0f;
    any = any || a > 0.0f;
    put_le(rec + 8 + 4 * i, std::bit_cast<std::uint32_t>(a), 4);
    put_le(rec + 8 + 4 * (dim + i), std::bit_cast<std::uint32_t>(ph), 4);
  }
  if (!any) out.resize(base);
  return any;
}

WavePattern decode_pattern(const std::uint8_t* rec, std::size_t dim) {
  std::vector<double> amp(dim);
  std::vector<double> ph(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    amp[i] = get_f32(rec + 8 + 4 * i);
    ph[i] = get_f32(rec + 8 + 4 * (dim + i));
  }
  return WavePattern(std::move(amp), std::move(ph));
}

// Scan-ready decoded records: planar real/imaginary parts in double.
struct Block {
  std::size_t dim = 0;
  std::vector<std::uint64_t> ids;
  std::vector<std::size_t> slots;
  std::vector<double> re;
  std::vector<double> im;
  std::vector<double> amp;
  std::vector<double> energy;

  std::size_t size() const noexcept { return ids.size(); }

  void append(const std::uint8_t* rec, std::size_t slot) {
    ids.push_back(get_le(rec, 8));
    slots.push_back(slot);
    double e = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double a = get_f32(rec + 8 + 4 * i);
      const double ph = get_f32(rec + 8 + 4 * (dim + i));
      re.push_back(a * std::cos(ph));
      im.push_back(a * std::sin(ph));
      amp.push_back(a);
      e += a * a;
    }
    energy.push_back(e);
  }
};

struct Snapshot {
  std::vector<std::shared_ptr<const Block>> blocks;
  std::vector<std::uint8_t> tombstones;
  std::size_t live = 0;

  bool dead(std::size_t slot) const noexcept {
    const std::size_t byte = slot / 8;
    return byte < tombstones.size() && ((tombstones[byte] >> (slot % 8)) & 1u);
  }
};

struct Candidate {
  double score;
  std::uint64_t id;
};

// Total order: higher score first, then lower id.
bool better(const Candidate& a, const Candidate& b) noexcept {
  return a.score > b.score || (a.score == b.score && a.id < b.id);
}

class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

  void offer(const Candidate& c) {
    if (heap_.size() < k_) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end(), better);
    } else if (better(c, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), better);
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end(), better);
    }
  }

  std::vector<Candidate>& items() noexcept { return heap_; }

 private:
  std::size_t k_;
  std::vector<Candidate> heap_;  // heap_.front() is the worst kept
};

struct Probe {
  std::vector<double> re;
  std::vector<double> im;
  std::vector<double> amp;
  double energy = 0.0;
};

double dot4(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void scan_range(const Block& block, std::size_t begin, std::size_t end, const Probe& probe,
                Kernel kernel, const Snapshot& snap, TopK& top) {
  const std::size_t dim = block.dim;
  for (std::size_t r = begin; r < end; ++r) {
    if (snap.dead(block.slots[r])) continue;
    const std::size_t off = r * dim;
    double score = 0.0;
    if (kernel == Kernel::amplitude_cosine) {
      const double dot = dot4(probe.amp.data(), block.amp.data() + off, dim);
      score = kernel_math::coherence(dot, probe.energy, block.energy[r]);
    } else {
      const double cross = dot4(probe.re.data(), block.re.data() + off, dim) +
                           dot4(probe.im.data(), block.im.data() + off, dim);
      score = kernel == Kernel::energy ? kernel_math::energy(cross, probe.energy, block.energy[r])
                                       : kernel_math::coherence(cross, probe.energy, block.energy[r]);
    }
    top.offer({score, block.ids[r]});
  }
}

int open_or_throw(const fs::path& p, int flags) {
  const int fd = ::open(p.c_str(), flags, 0644);
  if (fd < 0) throw Error(ErrorCode::StoreIO, "cannot open " + p.string() + ": " + std::strerror(errno));
  return fd;
}

void pwrite_all(int fd, const std::uint8_t* data, std::size_t n, off_t offset, const fs::path& p) {
  while (n > 0) {
    const ssize_t w = ::pwrite(fd, data, n, offset);
    if (w < 0) {
      ::close(fd);
      throw Error(ErrorCode::StoreIO, "write failed on " + p.string() + ": " + std::strerror(errno));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
    offset += w;
  }
}

void sync_close(int fd, const fs::path& p) {
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    throw Error(ErrorCode::StoreIO, "sync failed on " + p.string());
  }
}

// Whole-file replacement through a temporary and rename.
void write_atomic(const fs::path& p, const std::uint8_t* data, std::size_t n) {
  fs::path tmp = p;
  tmp += ".tmp";
  const int fd = open_or_throw(tmp, O_WRONLY | O_CREAT | O_TRUNC);
  pwrite_all(fd, data, n, 0, tmp);
  sync_close(fd, tmp);
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) throw Error(ErrorCode::StoreIO, "rename to " + p.string() + " failed: " + ec.message());
}

std::vector<std::uint8_t> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::CorruptStore, "missing file " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

struct SlotStore::Impl {
  fs::path dir;
  bool persistent = false;
  StoreOptions opt;

  // Writer state.
  std::vector<std::vector<std::uint8_t>> segments;  // record bytes, no header
  std::vector<std::size_t> flushed;                 // records on disk per segment
  std::size_t total = 0;
  std::vector<std::uint8_t> tombstones;
  std::unordered_map<std::uint64_t, std::size_t> live_ids;
  std::vector<std::shared_ptr<const Block>> blocks;
  std::shared_ptr<Block> pending;
  bool dirty = false;

  mutable std::mutex publish_mu;
  std::shared_ptr<const Snapshot> published = std::make_shared<Snapshot>();

  std::size_t rec_size() const noexcept { return record_size(opt.dim); }

  const std::uint8_t* record_at(std::size_t slot) const {
    const std::size_t seg = slot / opt.segment_capacity;
    const std::size_t idx = slot % opt.segment_capacity;
    return segments[seg].data() + idx * rec_size();
  }

  void set_tombstone(std::size_t slot) {
    if (tombstones.size() < (slot / 8) + 1) tombstones.resize(slot / 8 + 1, 0);
    tombstones[slot / 8] |= static_cast<std::uint8_t>(1u << (slot % 8));
  }

  std::vector<std::uint8_t> tombstone_bytes() const {
    std::vector<std::uint8_t> t = tombstones;
    t.resize((total + 7) / 8, 0);
    return t;
  }

  std::shared_ptr<const Snapshot> snapshot() const {
    std::lock_guard lock(publish_mu);
    return published;
  }

  json manifest() const {
    return json{{"dim", opt.dim},
                {"count", total},
                {"live", live_ids.size()},
                {"version", store_format::kVersion},
                {"seed", opt.seed},
                {"kernel_default", std::string(to_string(opt.kernel_default))},
                {"segments", segments.size()},
                {"segment_capacity", opt.segment_capacity}};
  }

  void write_sidecars() {
    const auto t = tombstone_bytes();
    write_atomic(dir / store_format::kTombstoneName, t.data(), t.size());
    const std::string m = manifest().dump(2) + "\n";
    write_atomic(dir / store_format::kManifestName,
                 reinterpret_cast<const std::uint8_t*>(m.data()), m.size());
  }

  void persist() {
    const std::size_t rs = rec_size();
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const std::size_t count = segments[s].size() / rs;
      if (count == flushed[s]) continue;
      const fs::path p = store_format::segment_path(dir, s);
      const int fd = open_or_throw(p, O_WRONLY | O_CREAT);
      // Records first, then the header that makes them visible.
      pwrite_all(fd, segments[s].data() + flushed[s] * rs, (count - flushed[s]) * rs,
                 static_cast<off_t>(kHeaderSize + flushed[s] * rs), p);
      const auto h = encode_header(opt.dim, count, opt.kernel_default);
      pwrite_all(fd, h.data(), h.size(), 0, p);
      sync_close(fd, p);
      flushed[s] = count;
    }
    write_sidecars();
  }

  void publish() {
    if (pending && pending->size() > 0) {
      blocks.push_back(std::move(pending));
    }
    pending.reset();
    auto snap = std::make_shared<Snapshot>();
    snap->blocks = blocks;
    snap->tombstones = tombstone_bytes();
    snap->live = live_ids.size();
    std::lock_guard lock(publish_mu);
    published = std::move(snap);
  }

  void append_encoded(const std::uint8_t* rec, std::uint64_t id) {
    const std::size_t rs = rec_size();
    if (segments.empty() || segments.back().size() / rs >= opt.segment_capacity) {
      segments.emplace_back();
      flushed.push_back(0);
    }
    segments.back().insert(segments.back().end(), rec, rec + rs);
    if (!pending) {
      pending = std::make_shared<Block>();
      pending->dim = opt.dim;
    }
    pending->append(rec, total);
    live_ids.emplace(id, total);
    ++total;
  }
};

SlotStore::SlotStore(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
SlotStore::SlotStore(SlotStore&&) noexcept = default;
SlotStore& SlotStore::operator=(SlotStore&&) noexcept = default;
SlotStore::~SlotStore() = default;

namespace {
void validate_options(const StoreOptions& o) {
  if (o.dim == 0 || o.dim > 0xFFFFFFFFu) {
    throw Error(ErrorCode::InvalidArgument, "store dim must be in [1, 2^32)");
  }
  if (o.segment_capacity == 0) throw Error(ErrorCode::InvalidArgument, "segment capacity must be >= 1");
}
}  // namespace

SlotStore SlotStore::in_memory(const StoreOptions& options) {
  validate_options(options);
  auto impl = std::make_unique<Impl>();
  impl->opt = options;
  return SlotStore(std::move(impl));
}

SlotStore SlotStore::create(const fs::path& dir, const StoreOptions& options) {
  validate_options(options);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::StoreIO, "cannot create " + dir.string() + ": " + ec.message());
  if (fs::exists(dir / store_format::kManifestName)) {
    throw Error(ErrorCode::StoreIO, "store already exists at " + dir.string());
  }
  auto impl = std::make_unique<Impl>();
  impl->opt = options;
  impl->dir = dir;
  impl->persistent = true;
  impl->write_sidecars();
  return SlotStore(std::move(impl));
}

SlotStore SlotStore::open(const fs::path& dir) {
  auto impl = std::make_unique<Impl>();
  impl->dir = dir;
  impl->persistent = true;

  const fs::path manifest_path = dir / store_format::kManifestName;
  const auto raw = read_file(manifest_path);
  json m;
  try {
    m = json::parse(raw.begin(), raw.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptStore, manifest_path.string() + ": unparseable (" + e.what() + ")");
  }
  auto field = [&](const char* name) -> const json& {
    if (!m.is_object() || !m.contains(name)) {
      throw Error(ErrorCode::CorruptStore, manifest_path.string() + ": missing field '" + name + "'");
    }
    return m.at(name);
  };
  auto unsigned_field = [&](const char* name) -> std::uint64_t {
    const json& v = field(name);
    if (!v.is_number_unsigned()) {
      throw Error(ErrorCode::CorruptStore, manifest_path.string() + ": bad field '" + name + "'");
    }
    return v.get<std::uint64_t>();
  };

  if (unsigned_field("version") != store_format::kVersion) {
    throw Error(ErrorCode::CorruptStore, manifest_path.string() + ": unsupported version");
  }
  StoreOptions& opt = impl->opt;
  opt.dim = unsigned_field("dim");
  if (opt.dim == 0 || opt.dim > 0xFFFFFFFFu) {
    throw Error(ErrorCode::CorruptStore, manifest_path.string() + ": bad dim");
  }
  opt.seed = unsigned_field("seed");
  opt.segment_capacity = unsigned_field("segment_capacity");
  if (opt.segment_capacity == 0) {
    throw Error(ErrorCode::CorruptStore, manifest_path.string() + ": bad segment_capacity");
  }
  const json& kname = field("kernel_default");
  try {
    opt.kernel_default = kernel_from_string(kname.is_string() ? kname.get<std::string>() : "");
  } catch (const Error&) {
    throw Error(ErrorCode::CorruptStore, manifest_path.string() + ": bad kernel_default");
  }
  const std::uint64_t count = unsigned_field("count");
  const std::uint64_t live = unsigned_field("live");
  const std::uint64_t n_segments = unsigned_field("segments");

  const fs::path tomb_path = dir / store_format::kTombstoneName;
  impl->tombstones = read_file(tomb_path);
  if (impl->tombstones.size() != (count + 7) / 8) {
    throw Error(ErrorCode::CorruptStore, tomb_path.string() + ": size does not match record count");
  }

  const std::size_t rs = record_size(opt.dim);
  std::uint64_t seen = 0;
  for (std::size_t s = 0; s < n_segments; ++s) {
    const fs::path p = store_format::segment_path(dir, s);
    auto bytes = read_file(p);
    if (bytes.size() < kHeaderSize) {
      throw Error(ErrorCode::CorruptStore, p.string() + ": truncated header");
    }
    if (std::memcmp(bytes.data(), store_format::kMagic, 4) != 0) {
      throw Error(ErrorCode::CorruptStore, p.string() + ": bad magic");
    }
    if (get_le(bytes.data() + 4, 2) != store_format::kVersion) {
      throw Error(ErrorCode::CorruptStore, p.string() + ": bad version");
    }
    if (get_le(bytes.data() + 6, 4) != opt.dim) {
      throw Error(ErrorCode::CorruptStore, p.string() + ": bad dim");
    }
    if (bytes[18] > static_cast<std::uint8_t>(Kernel::amplitude_cosine)) {
      throw Error(ErrorCode::CorruptStore, p.string() + ": bad kernel id");
    }
    const std::uint64_t n = get_le(bytes.data() + 10, 8);
    if (bytes.size() != kHeaderSize + n * rs) {
      throw Error(ErrorCode::CorruptStore, p.string() + ": truncated or oversized record area (" +
                                               std::to_string(bytes.size()) + " bytes for " +
                                               std::to_string(n) + " records)");
    }
    const bool last = s + 1 == n_segments;
    if (n > opt.segment_capacity || (!last && n != opt.segment_capacity)) {
      throw Error(ErrorCode::CorruptStore, p.string() + ": record count breaks segment layout");
    }
    auto block = std::make_shared<Block>();
    block->dim = opt.dim;
    for (std::uint64_t r = 0; r < n; ++r) {
      const std::uint8_t* rec = bytes.data() + kHeaderSize + r * rs;
      const std::size_t slot = impl->total;
      if (slot / 8 >= impl->tombstones.size()) {
        throw Error(ErrorCode::CorruptStore, p.string() + ": more records than the manifest count");
      }
      try {
        (void)decode_pattern(rec, opt.dim);
      } catch (const Error&) {
        throw Error(ErrorCode::CorruptStore, p.string() + ": invalid record " + std::to_string(r));
      }
      block->append(rec, slot);
      const std::uint64_t id = block->ids.back();
      const bool dead = (impl->tombstones[slot / 8] >> (slot % 8)) & 1u;
      if (!dead && !impl->live_ids.emplace(id, slot).second) {
        throw Error(ErrorCode::CorruptStore, p.string() + ": duplicate live id " + std::to_string(id));
      }
      ++impl->total;
    }
    seen += n;
    bytes.erase(bytes.begin(), bytes.begin() + kHeaderSize);
    impl->segments.push_back(std::move(bytes));
    impl->flushed.push_back(n);
    if (block->size() > 0) impl->blocks.push_back(std::move(block));
  }
  if (seen != count) {
    throw Error(ErrorCode::CorruptStore, manifest_path.string() + ": count " + std::to_string(count) +
                                             " but segments hold " + std::to_string(seen));
  }
  if (live != impl->live_ids.size()) {
    throw Error(ErrorCode::CorruptStore, manifest_path.string() + ": live count mismatch");
  }
  impl->publish();
  return SlotStore(std::move(impl));
}

void SlotStore::put(std::uint64_t id, const WavePattern& pattern) {
  Impl& s = *impl_;
  if (pattern.dim() != s.opt.dim) {
    throw Error(ErrorCode::DimMismatch, "store dim " + std::to_string(s.opt.dim) +
                                            ", pattern dim " + std::to_string(pattern.dim()));
  }
  if (s.live_ids.contains(id)) throw Error(ErrorCode::DuplicateId, std::to_string(id));
  std::vector<std::uint8_t> rec;
  if (!encode_record(rec, id, pattern)) {
    throw Error(ErrorCode::ZeroEnergy, "pattern for id " + std::to_string(id) + " has no energy");
  }
  s.append_encoded(rec.data(), id);
  s.dirty = true;
}

void SlotStore::remove(std::uint64_t id) {
  Impl& s = *impl_;
  const auto it = s.live_ids.find(id);
  if (it == s.live_ids.end()) throw Error(ErrorCode::InvalidArgument, "id " + std::to_string(id) + " is not live");
  s.set_tombstone(it->second);
  s.live_ids.erase(it);
  s.dirty = true;
}

void SlotStore::flush() {
  Impl& s = *impl_;
  if (s.persistent && s.dirty) s.persist();
  s.dirty = false;
  s.publish();
}

void SlotStore::compact() {
  flush();
  Impl& s = *impl_;
  std::vector<std::pair<std::size_t, std::uint64_t>> keep(s.live_ids.begin(), s.live_ids.end());
  std::vector<std::pair<std::size_t, std::uint64_t>> by_slot;
  by_slot.reserve(keep.size());
  for (const auto& [id, slot] : keep) by_slot.emplace_back(slot, id);
  std::sort(by_slot.begin(), by_slot.end());

  std::vector<std::uint8_t> live_bytes;
  const std::size_t rs = s.rec_size();
  live_bytes.reserve(by_slot.size() * rs);
  for (const auto& [slot, id] : by_slot) {
    const std::uint8_t* rec = s.record_at(slot);
    live_bytes.insert(live_bytes.end(), rec, rec + rs);
  }
  const std::size_t old_segments = s.segments.size();

  s.segments.clear();
  s.flushed.clear();
  s.total = 0;
  s.tombstones.clear();
  s.live_ids.clear();
  s.blocks.clear();
  s.pending.reset();
  for (std::size_t i = 0; i < by_slot.size(); ++i) {
    s.append_encoded(live_bytes.data() + i * rs, by_slot[i].second);
  }

  if (s.persistent) {
    // New segments go to temporaries first; old files are replaced by rename.
    for (std::size_t i = 0; i < s.segments.size(); ++i) {
      const std::size_t count = s.segments[i].size() / rs;
      std::vector<std::uint8_t> file;
      const auto h = encode_header(s.opt.dim, count, s.opt.kernel_default);
      file.insert(file.end(), h.begin(), h.end());
      file.insert(file.end(), s.segments[i].begin(), s.segments[i].end());
      write_atomic(store_format::segment_path(s.dir, i), file.data(), file.size());
      s.flushed[i] = count;
    }
    s.write_sidecars();
    for (std::size_t i = s.segments.size(); i < old_segments; ++i) {
      std::error_code ec;
      fs::remove(store_format::segment_path(s.dir, i), ec);
    }
  }
  s.dirty = false;
  s.publish();
}

std::vector<QueryResult> SlotStore::query_topk(const WavePattern& probe, std::size_t k,
                                               const ScanOptions& options) const {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  const Impl& s = *impl_;
  if (probe.dim() != s.opt.dim) {
    throw Error(ErrorCode::DimMismatch, "store dim " + std::to_string(s.opt.dim) +
                                            ", probe dim " + std::to_string(probe.dim()));
  }
  const auto snap = s.snapshot();
  if (snap->live == 0) throw Error(ErrorCode::EmptyStore, "query against a store with no live records");

  Probe pr;
  pr.amp.assign(probe.amplitude().begin(), probe.amplitude().end());
  pr.re.resize(probe.dim());
  pr.im.resize(probe.dim());
  for (std::size_t i = 0; i < probe.dim(); ++i) {
    pr.re[i] = pr.amp[i] * std::cos(probe.phase()[i]);
    pr.im[i] = pr.amp[i] * std::sin(probe.phase()[i]);
  }
  pr.energy = energy(probe);
  if (!(pr.energy > 0.0)) throw Error(ErrorCode::ZeroEnergy, "zero-energy probe");
  const Kernel kernel = options.kernel.value_or(s.opt.kernel_default);

  struct Range {
    const Block* block;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Range> ranges;
  for (const auto& b : snap->blocks) {
    for (std::size_t r = 0; r < b->size(); r += kScanChunk) {
      ranges.push_back({b.get(), r, std::min(b->size(), r + kScanChunk)});
    }
  }

  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(ranges.size(), 1));
  std::vector<TopK> partial(threads, TopK(k));
  auto work = [&](std::size_t t) {
    for (std::size_t i = t; i < ranges.size(); i += threads) {
      scan_range(*ranges[i].block, ranges[i].begin, ranges[i].end, pr, kernel, *snap, partial[t]);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }

  std::vector<Candidate> merged;
  for (auto& p : partial) merged.insert(merged.end(), p.items().begin(), p.items().end());
  std::sort(merged.begin(), merged.end(), better);
  if (merged.size() > k) merged.resize(k);

  std::vector<QueryResult> out;
  out.reserve(merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    out.push_back({merged[i].id, {merged[i].score, kernel}, i + 1});
  }
  return out;
}

std::optional<WavePattern> SlotStore::get(std::uint64_t id) const {
  const auto it = impl_->live_ids.find(id);
  if (it == impl_->live_ids.end()) return std::nullopt;
  return decode_pattern(impl_->record_at(it->second), impl_->opt.dim);
}

bool SlotStore::contains(std::uint64_t id) const { return impl_->live_ids.contains(id); }

std::vector<StoredRecord> SlotStore::records() const {
  const Impl& s = *impl_;
  const auto snap = s.snapshot();
  std::vector<StoredRecord> out;
  out.reserve(snap->live);
  for (const auto& b : snap->blocks) {
    for (std::size_t r = 0; r < b->size(); ++r) {
      if (snap->dead(b->slots[r])) continue;
      out.push_back({b->ids[r], decode_pattern(s.record_at(b->slots[r]), s.opt.dim)});
    }
  }
  return out;
}

std::size_t SlotStore::dim() const noexcept { return impl_->opt.dim; }
Kernel SlotStore::kernel_default() const noexcept { return impl_->opt.kernel_default; }
std::uint64_t SlotStore::seed() const noexcept { return impl_->opt.seed; }
std::size_t SlotStore::record_count() const noexcept { return impl_->total; }
std::size_t SlotStore::live_count() const noexcept { return impl_->live_ids.size(); }
std::size_t SlotStore::segment_count() const noexcept { return impl_->segments.size(); }
bool SlotStore::persistent() const noexcept { return impl_->persistent; }
const fs::path& SlotStore::path() const noexcept { return impl_->dir; }

std::uint64_t SlotStore::checksum() const {
  const Impl& s = *impl_;
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](const std::uint8_t* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001B3ULL;
    }
  };
  for (const auto& seg : s.segments) {
    const auto hdr = encode_header(s.opt.dim, seg.size() / s.rec_size(), s.opt.kernel_default);
    mix(hdr.data(), hdr.size());
    mix(seg.data(), seg.size());
  }
  return h;
}

}  // namespace wavefield
