#include "device.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <unordered_map>

namespace detworam {

std::string TraceMeta::header_line() const {
  std::ostringstream os;
  os << "# scheme=" << scheme << " block_bytes=" << block_bytes
     << " blocks=" << num_blocks;
  if (!params.empty()) os << ' ' << params;
  return os.str();
}

TraceMeta TraceMeta::parse_header(const std::string& line) {
  TraceMeta m;
  std::istringstream is(line);
  std::string tok;
  is >> tok;  // '#'
  std::string extras;
  while (is >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
    if (k == "scheme")
      m.scheme = v;
    else if (k == "block_bytes")
      m.block_bytes = uint32_t(std::stoul(v));
    else if (k == "blocks")
      m.num_blocks = std::stoull(v);
    else {
      if (!extras.empty()) extras += ' ';
      extras += tok;
    }
  }
  m.params = extras;
  return m;
}

void Trace::append(OpKind kind, uint64_t index) {
  std::lock_guard<std::mutex> lk(mu_);
  uint64_t seq = next_seq_++;
  if (kind == OpKind::Read)
    ++reads_;
  else
    ++writes_;
  if (sink_) {
    if (!sink_header_done_) {
      *sink_ << meta_.header_line() << '\n';
      sink_header_done_ = true;
    }
    *sink_ << seq << ',' << (kind == OpKind::Read ? 'R' : 'W') << ',' << index
           << '\n';
    return;
  }
  events_.push_back(TraceEvent{seq, kind, index});
}

void Trace::clear() {
  std::lock_guard<std::mutex> lk(mu_);
  events_.clear();
  next_seq_ = 0;
  reads_ = 0;
  writes_ = 0;
}

void Trace::set_sink(std::ostream* sink) {
  std::lock_guard<std::mutex> lk(mu_);
  sink_ = sink;
  sink_header_done_ = false;
}

void Trace::save(std::ostream& os) const {
  os << meta_.header_line() << '\n';
  for (const auto& e : events_) {
    os << e.seq << ',' << (e.kind == OpKind::Read ? 'R' : 'W') << ',' << e.index
       << '\n';
  }
}

void Trace::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(DW_ERR_IO, "cannot open trace file for writing: " + path);
  save(os);
  if (!os.good()) fail(DW_ERR_IO, "short write on trace file: " + path);
}

Trace Trace::load(std::istream& is) {
  Trace t;
  std::string line;
  bool have_meta = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.meta_ = TraceMeta::parse_header(line);
      have_meta = true;
      continue;
    }
    uint64_t seq, index;
    char kind;
    if (std::sscanf(line.c_str(), "%lu,%c,%lu", &seq, &kind, &index) != 3)
      fail(DW_ERR_MALFORMED, "bad trace line: " + line);
    OpKind k = kind == 'R' ? OpKind::Read : OpKind::Write;
    if (kind != 'R' && kind != 'W')
      fail(DW_ERR_MALFORMED, "bad trace event kind: " + line);
    t.events_.push_back(TraceEvent{seq, k, index});
    if (k == OpKind::Read)
      ++t.reads_;
    else
      ++t.writes_;
  }
  if (!have_meta && !t.events_.empty())
    fail(DW_ERR_MALFORMED, "trace has no metadata header");
  t.next_seq_ = t.events_.empty() ? 0 : t.events_.back().seq + 1;
  return t;
}

Trace Trace::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(DW_ERR_IO, "cannot open trace file: " + path);
  return load(is);
}

Trace Trace::filter_writes(const Trace& t) {
  Trace out(t.meta_);
  for (const auto& e : t.events_)
    if (e.kind == OpKind::Write) out.events_.push_back(e);
  out.writes_ = out.events_.size();
  out.next_seq_ = t.next_seq_;
  return out;
}

BlockStore::BlockStore(uint32_t block_bytes, uint64_t num_blocks)
    : block_bytes_(block_bytes), num_blocks_(num_blocks) {
  if (block_bytes == 0 || num_blocks == 0)
    fail(DW_ERR_INVALID_ARG, "block store geometry must be positive");
}

void BlockStore::check_index(uint64_t index) const {
  if (index >= num_blocks_)
    fail(DW_ERR_INDEX_RANGE, "block index " + std::to_string(index) +
                                 " out of range [0," +
                                 std::to_string(num_blocks_) + ")");
}

Bytes BlockStore::read_block(uint64_t index) {
  Bytes out(block_bytes_);
  read_block(index, out);
  return out;
}

void BlockStore::read_block(uint64_t index, std::span<uint8_t> out) {
  check_index(index);
  if (out.size() != block_bytes_)
    fail(DW_ERR_SIZE_MISMATCH, "read buffer size mismatch");
  do_read(index, out);
  if (tracing_ && trace_) trace_->append(OpKind::Read, index);
}

void BlockStore::write_block(uint64_t index, ByteView data) {
  check_index(index);
  if (data.size() != block_bytes_)
    fail(DW_ERR_SIZE_MISMATCH,
         "write of " + std::to_string(data.size()) + " bytes, block is " +
             std::to_string(block_bytes_));
  do_write(index, data);
  if (tracing_ && trace_) trace_->append(OpKind::Write, index);
}

Bytes BlockStore::image() {
  Bytes out(size_t(block_bytes_) * num_blocks_);
  for (uint64_t i = 0; i < num_blocks_; ++i)
    do_read(i, std::span<uint8_t>(out.data() + i * block_bytes_, block_bytes_));
  return out;
}

MemStore::MemStore(uint32_t block_bytes, uint64_t num_blocks)
    : BlockStore(block_bytes, num_blocks) {
  buf_.resize(size_t(block_bytes) * num_blocks);
}

void MemStore::do_read(uint64_t index, std::span<uint8_t> out) {
  std::memcpy(out.data(), buf_.data() + index * block_bytes(), block_bytes());
}

void MemStore::do_write(uint64_t index, ByteView data) {
  std::memcpy(buf_.data() + index * block_bytes(), data.data(), block_bytes());
}

Bytes MemStore::image() { return buf_; }

SparseMemStore::SparseMemStore(uint32_t block_bytes, uint64_t num_blocks)
    : BlockStore(block_bytes, num_blocks) {}

void SparseMemStore::set_fill(uint64_t first, uint64_t count, FillFn fn) {
  fill_ = Fill{first, count, std::move(fn)};
}

void SparseMemStore::do_read(uint64_t index, std::span<uint8_t> out) {
  auto it = blocks_.find(index);
  if (it != blocks_.end()) {
    std::memcpy(out.data(), it->second.data(), block_bytes());
    return;
  }
  if (fill_ && index >= fill_->first && index - fill_->first < fill_->count) {
    fill_->fn(index, out);
    return;
  }
  std::memset(out.data(), 0, out.size());
}

void SparseMemStore::do_write(uint64_t index, ByteView data) {
  blocks_[index].assign(data.begin(), data.end());
}

Bytes SparseMemStore::image() {
  Bytes out(size_t(block_bytes()) * num_blocks());
  for (uint64_t i = 0; i < num_blocks(); ++i)
    do_read(i, std::span<uint8_t>(out.data() + i * block_bytes(), block_bytes()));
  return out;
}

FileStore::FileStore(int fd, uint32_t block_bytes, uint64_t num_blocks)
    : BlockStore(block_bytes, num_blocks), fd_(fd) {}

std::unique_ptr<FileStore> FileStore::create(const std::string& path,
                                             uint32_t block_bytes,
                                             uint64_t num_blocks) {
  int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_TRUNC, 0600);
  if (fd < 0) fail(DW_ERR_IO, "cannot create " + path + ": " + strerror(errno));
  if (::ftruncate(fd, off_t(block_bytes) * off_t(num_blocks)) != 0) {
    int e = errno;
    ::close(fd);
    fail(DW_ERR_IO, "cannot size " + path + ": " + strerror(e));
  }
  return std::unique_ptr<FileStore>(new FileStore(fd, block_bytes, num_blocks));
}

std::unique_ptr<FileStore> FileStore::open(const std::string& path,
                                           uint32_t block_bytes,
                                           uint64_t num_blocks) {
  int fd = ::open(path.c_str(), O_RDWR);
  if (fd < 0) fail(DW_ERR_IO, "cannot open " + path + ": " + strerror(errno));
  struct stat st;
  if (::fstat(fd, &st) != 0 ||
      st.st_size < off_t(block_bytes) * off_t(num_blocks)) {
    ::close(fd);
    fail(DW_ERR_BAD_MAGIC, "container file is truncated: " + path);
  }
  return std::unique_ptr<FileStore>(new FileStore(fd, block_bytes, num_blocks));
}

Bytes FileStore::read_prefix(const std::string& path, uint32_t nbytes) {
  int fd = ::open(path.c_str(), O_RDONLY);
  if (fd < 0) fail(DW_ERR_IO, "cannot open " + path + ": " + strerror(errno));
  Bytes out(nbytes);
  ssize_t got = ::pread(fd, out.data(), nbytes, 0);
  ::close(fd);
  if (got != ssize_t(nbytes))
    fail(DW_ERR_BAD_MAGIC, "container too small to hold a superblock");
  return out;
}

FileStore::~FileStore() {
  if (fd_ >= 0) ::close(fd_);
}

void FileStore::flush() {
  if (::fdatasync(fd_) != 0)
    fail(DW_ERR_IO, std::string("fdatasync: ") + strerror(errno));
}

void FileStore::do_read(uint64_t index, std::span<uint8_t> out) {
  ssize_t got =
      ::pread(fd_, out.data(), out.size(), off_t(index) * block_bytes());
  if (got != ssize_t(out.size()))
    fail(DW_ERR_IO, "short read at block " + std::to_string(index));
}

void FileStore::do_write(uint64_t index, ByteView data) {
  ssize_t put =
      ::pwrite(fd_, data.data(), data.size(), off_t(index) * block_bytes());
  if (put != ssize_t(data.size()))
    fail(DW_ERR_IO, "short write at block " + std::to_string(index));
}

Bytes FileStore::image() {
  Bytes out(size_t(block_bytes()) * num_blocks());
  ssize_t got = ::pread(fd_, out.data(), out.size(), 0);
  if (got != ssize_t(out.size())) fail(DW_ERR_IO, "short read of device image");
  return out;
}

}  // namespace detworam
