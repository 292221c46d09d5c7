#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <thread>

#include <json.hpp>

#include "oracle.hpp"
#include "temp_dir.hpp"
#include "wavefield/error.hpp"
#include "wavefield/random.hpp"
#include "wavefield/slot_store.hpp"

using namespace wavefield;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

std::string error_text(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

}  // namespace

TEST_CASE("record layout") {
  CHECK(store_format::record_size(1) == 64);
  CHECK(store_format::record_size(7) == 64);
  CHECK(store_format::record_size(8) == 128);
  CHECK(store_format::record_size(256) == 2112);
}

TEST_CASE("segment bytes follow the documented layout") {
  TempDir tmp;
  const fs::path dir = tmp.path() / "s";
  SlotStore store = SlotStore::create(dir, {.dim = 3, .kernel_default = Kernel::energy, .seed = 5});
  store.put(0x0102030405060708ULL, WavePattern({1.0, 0.5, 0.0}, {0.25, 1.0, 0.0}));
  store.flush();

  const auto bytes = read_bytes(store_format::segment_path(dir, 0));
  REQUIRE(bytes.size() == 64 + 64);
  CHECK(std::memcmp(bytes.data(), "WFLD", 4) == 0);
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 3);
  CHECK(bytes[10] == 1);
  CHECK(bytes[18] == 1);
  for (std::size_t i = 19; i < 64; ++i) CHECK(bytes[i] == 0);
  CHECK(bytes[64] == 0x08);
  CHECK(bytes[71] == 0x01);
  float f;
  std::memcpy(&f, bytes.data() + 64 + 8 + 4, 4);
  CHECK(f == 0.5f);
  std::memcpy(&f, bytes.data() + 64 + 8 + 12, 4);
  CHECK(f == 0.25f);
  for (std::size_t i = 64 + 8 + 24; i < 128; ++i) CHECK(bytes[i] == 0);

  const auto manifest = nlohmann::json::parse(read_bytes(dir / "manifest.json"));
  CHECK(manifest["dim"] == 3);
  CHECK(manifest["count"] == 1);
  CHECK(manifest["live"] == 1);
  CHECK(manifest["version"] == 1);
  CHECK(manifest["seed"] == 5);
  CHECK(manifest["kernel_default"] == "energy");
}

TEST_CASE("put and read back") {
  Rng rng(1);
  SlotStore store = SlotStore::in_memory({.dim = 32});
  const WavePattern p = rng.pattern(32);
  store.put(7, p);
  store.flush();
  const auto got = store.get(7);
  REQUIRE(got);
  CHECK(*got == oracle::quantize(p));
  CHECK(store.records().front().pattern == oracle::quantize(p));

  CHECK(code_of([&] { store.put(8, rng.pattern(16)); }) == ErrorCode::DimMismatch);
  CHECK(code_of([&] { store.put(7, rng.pattern(32)); }) == ErrorCode::DuplicateId);
  CHECK(code_of([&] { store.put(9, WavePattern::zero(32)); }) == ErrorCode::ZeroEnergy);
  CHECK(code_of([&] { store.remove(99); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("query basics") {
  Rng rng(2);
  SlotStore store = SlotStore::in_memory({.dim = 64});
  CHECK(code_of([&] { store.query_topk(rng.pattern(64), 1); }) == ErrorCode::EmptyStore);

  const WavePattern p = rng.pattern(64);
  store.put(1, p);
  store.flush();
  auto r = store.query_topk(p, 5);
  REQUIRE(r.size() == 1);
  CHECK(r[0].id == 1);
  CHECK(r[0].rank == 1);
  CHECK(r[0].score.value == doctest::Approx(1.0).epsilon(1e-6));

  store.put(2, phase_shift(p, std::numbers::pi));
  store.put(3, rng.pattern(64));
  store.flush();
  r = store.query_topk(p, 3);
  REQUIRE(r.size() == 3);
  CHECK(r[0].id == 1);
  CHECK(r[2].id == 2);
  CHECK(r[2].score.value == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(r[1].rank == 2);

  CHECK(code_of([&] { store.query_topk(p, 0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { store.query_topk(rng.pattern(8), 1); }) == ErrorCode::DimMismatch);
  CHECK(code_of([&] { store.query_topk(WavePattern::zero(64), 1); }) == ErrorCode::ZeroEnergy);
}

TEST_CASE("staged writes are invisible until flush") {
  Rng rng(3);
  SlotStore store = SlotStore::in_memory({.dim = 16});
  store.put(1, rng.pattern(16));
  store.flush();
  const WavePattern q = rng.pattern(16);
  store.put(2, q);
  CHECK(store.query_topk(q, 10).size() == 1);
  store.flush();
  CHECK(store.query_topk(q, 10).front().id == 2);
}

TEST_CASE("ties break by ascending id") {
  const WavePattern p({1.0, 0.0}, {0.0, 0.0});
  SlotStore store = SlotStore::in_memory({.dim = 2});
  for (std::uint64_t id : {9u, 3u, 5u}) store.put(id, p);
  store.flush();
  const auto r = store.query_topk(p, 3);
  CHECK(r[0].id == 3);
  CHECK(r[1].id == 5);
  CHECK(r[2].id == 9);
}

TEST_CASE("10,000 seeded patterns against the naive scan") {
  Rng rng(4);
  SlotStore store = SlotStore::in_memory({.dim = 64, .segment_capacity = 3000});
  std::vector<std::pair<std::uint64_t, WavePattern>> records;
  for (std::uint64_t id = 0; id < 10000; ++id) {
    const WavePattern p = rng.pattern(64);
    store.put(id, p);
    records.emplace_back(id, oracle::quantize(p));
  }
  store.flush();
  CHECK(store.record_count() == 10000);
  CHECK(store.segment_count() == 4);

  std::set<std::uint64_t> ids;
  for (const auto& r : store.records()) ids.insert(r.id);
  CHECK(ids.size() == 10000);

  const WavePattern probe = records[4242].second;
  for (std::size_t threads : {1u, 3u}) {
    const auto got = store.query_topk(probe, 10000, {.kernel = Kernel::coherence, .threads = threads});
    const auto want = oracle::naive_topk(records, probe, 10000, Kernel::coherence);
    REQUIRE(got.size() == want.size());
    CHECK(got.front().id == 4242);
    bool same = true;
    for (std::size_t i = 0; i < got.size(); ++i) same = same && got[i].id == want[i].id && got[i].rank == i + 1;
    CHECK(same);
  }
}

TEST_CASE("tombstones hide records and compaction drops them") {
  TempDir tmp;
  const fs::path dir = tmp.path() / "s";
  Rng rng(5);
  std::vector<WavePattern> ps;
  {
    SlotStore store = SlotStore::create(dir, {.dim = 16});
    for (std::uint64_t id = 0; id < 20; ++id) {
      ps.push_back(rng.pattern(16));
      store.put(id, ps.back());
    }
    store.flush();
    store.remove(4);
    store.remove(11);
    store.flush();
    for (const auto& r : store.query_topk(ps[4], 20)) CHECK(r.id != 4);
    CHECK(store.live_count() == 18);
    CHECK(store.record_count() == 20);
    CHECK_FALSE(store.contains(4));
  }
  SlotStore store = SlotStore::open(dir);
  CHECK(store.live_count() == 18);
  const auto before = store.query_topk(ps[0], 20);
  store.compact();
  CHECK(store.record_count() == 18);
  CHECK(store.query_topk(ps[0], 20) == before);
  // A removed id can be reused.
  store.put(4, ps[4]);
  store.flush();
  CHECK(store.query_topk(ps[4], 1).front().id == 4);
  CHECK(SlotStore::open(dir).live_count() == 19);
}

TEST_CASE("reopen gives byte-identical results") {
  TempDir tmp;
  const fs::path dir = tmp.path() / "s";
  Rng rng(6);
  std::vector<std::vector<QueryResult>> before;
  std::vector<WavePattern> probes;
  std::uint64_t sum = 0;
  for (int q = 0; q < 5; ++q) probes.push_back(rng.pattern(48));
  {
    SlotStore store = SlotStore::create(dir, {.dim = 48, .seed = 3});
    for (std::uint64_t id = 0; id < 100; ++id) store.put(id * 3, rng.pattern(48));
    store.flush();
    for (const auto& p : probes) before.push_back(store.query_topk(p, 10, {.kernel = Kernel::energy, .threads = 1}));
    sum = store.checksum();
  }
  const SlotStore store = SlotStore::open(dir);
  CHECK(store.checksum() == sum);
  CHECK(store.seed() == 3);
  for (std::size_t q = 0; q < probes.size(); ++q) {
    CHECK(store.query_topk(probes[q], 10, {.kernel = Kernel::energy, .threads = 1}) == before[q]);
  }
  CHECK(code_of([&] { SlotStore::create(dir, {.dim = 48}); }) == ErrorCode::StoreIO);
}

TEST_CASE("flushed records survive an unflushed tail") {
  TempDir tmp;
  const fs::path dir = tmp.path() / "s";
  const fs::path snapshot = tmp.path() / "copy";
  Rng rng(7);
  SlotStore store = SlotStore::create(dir, {.dim = 8});
  for (std::uint64_t id = 0; id < 10; ++id) store.put(id, rng.pattern(8));
  store.flush();
  for (std::uint64_t id = 10; id < 15; ++id) store.put(id, rng.pattern(8));
  fs::copy(dir, snapshot, fs::copy_options::recursive);
  const SlotStore copy = SlotStore::open(snapshot);
  CHECK(copy.live_count() == 10);
  for (std::uint64_t id = 0; id < 10; ++id) CHECK(copy.contains(id));
}

TEST_CASE("corruption is detected") {
  TempDir tmp;
  Rng rng(8);
  auto fresh = [&](const std::string& name) {
    const fs::path dir = tmp.path() / name;
    SlotStore store = SlotStore::create(dir, {.dim = 8});
    for (std::uint64_t id = 0; id < 5; ++id) store.put(id, rng.pattern(8));
    store.flush();
    return dir;
  };

  SUBCASE("bad magic") {
    const fs::path dir = fresh("magic");
    auto b = read_bytes(store_format::segment_path(dir, 0));
    b[0] = 'X';
    write_bytes(store_format::segment_path(dir, 0), b);
    CHECK(code_of([&] { SlotStore::open(dir); }) == ErrorCode::CorruptStore);
  }
  SUBCASE("bad segment version") {
    const fs::path dir = fresh("version");
    auto b = read_bytes(store_format::segment_path(dir, 0));
    b[4] = 2;
    write_bytes(store_format::segment_path(dir, 0), b);
    CHECK(code_of([&] { SlotStore::open(dir); }) == ErrorCode::CorruptStore);
  }
  SUBCASE("bad manifest version") {
    const fs::path dir = fresh("manifest");
    auto m = nlohmann::json::parse(read_bytes(dir / "manifest.json"));
    m["version"] = 9;
    const std::string text = m.dump();
    write_bytes(dir / "manifest.json", {text.begin(), text.end()});
    CHECK(code_of([&] { SlotStore::open(dir); }) == ErrorCode::CorruptStore);
  }
  SUBCASE("truncated record names the segment") {
    const fs::path dir = fresh("trunc");
    const fs::path seg = store_format::segment_path(dir, 0);
    fs::resize_file(seg, fs::file_size(seg) - 1);
    CHECK(code_of([&] { SlotStore::open(dir); }) == ErrorCode::CorruptStore);
    CHECK(error_text([&] { SlotStore::open(dir); }).find("segment-000000.wfld") != std::string::npos);
  }
  SUBCASE("missing manifest") {
    const fs::path dir = fresh("gone");
    fs::remove(dir / "manifest.json");
    CHECK(code_of([&] { SlotStore::open(dir); }) == ErrorCode::CorruptStore);
  }
}

TEST_CASE("32-bit storage moves coherence by less than 1e-3") {
  Rng rng(9);
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    const WavePattern a = rng.pattern(256);
    const WavePattern b = superpose(a, scale(rng.pattern(256), 0.5));
    worst = std::max(worst, std::abs(resonance_coherence(a, oracle::quantize(b)).value - resonance_coherence(a, b).value));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("concurrent readers see whole snapshots") {
  Rng rng(10);
  SlotStore store = SlotStore::in_memory({.dim = 16});
  const WavePattern probe = rng.pattern(16);
  store.put(0, probe);
  store.flush();
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::vector<std::jthread> readers;
  for (int t = 0; t < 3; ++t) {
    readers.emplace_back([&] {
      while (!done) {
        const auto r = store.query_topk(probe, 1000);
        for (std::size_t i = 0; i < r.size(); ++i) {
          if (r[i].rank != i + 1) ++bad;
        }
        if (r.front().id != 0) ++bad;
      }
    });
  }
  for (std::uint64_t id = 1; id < 300; ++id) {
    store.put(id, rng.pattern(16));
    if (id % 10 == 0) store.flush();
  }
  done = true;
  readers.clear();
  CHECK(bad == 0);
}
