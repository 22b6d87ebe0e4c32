#include "crypto.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <fstream>
#include <memory>

namespace detworam {

namespace {

struct CtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;

CipherCtx make_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) fail(DW_ERR_INTERNAL, "EVP_CIPHER_CTX_new failed");
  return ctx;
}

}  // namespace

void random_bytes(std::span<uint8_t> out) {
  if (RAND_bytes(out.data(), int(out.size())) != 1)
    fail(DW_ERR_INTERNAL, "RAND_bytes failed");
}

CipherKey CipherKey::random() {
  CipherKey k;
  random_bytes(k.bytes);
  return k;
}

CipherKey CipherKey::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(DW_ERR_IO, "cannot open key file: " + path);
  CipherKey k;
  is.read(reinterpret_cast<char*>(k.bytes.data()), kKeyBytes);
  if (is.gcount() != std::streamsize(kKeyBytes))
    fail(DW_ERR_IO, "key file must hold exactly 32 raw bytes: " + path);
  return k;
}

void CipherKey::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(DW_ERR_IO, "cannot write key file: " + path);
  os.write(reinterpret_cast<const char*>(bytes.data()), kKeyBytes);
  if (!os.good()) fail(DW_ERR_IO, "short write on key file: " + path);
}

void CtrAudit::record(const CtrContext& ctx) {
  std::lock_guard<std::mutex> lk(mu_);
  auto [it, fresh] = seen_[ctx.epoch].insert(ctx.index);
  if (!fresh)
    fail(DW_ERR_INTERNAL, "counter context reuse: epoch " +
                              std::to_string(ctx.epoch) + " index " +
                              std::to_string(ctx.index));
  ++count_;
}

uint64_t CtrAudit::contexts_seen() const {
  std::lock_guard<std::mutex> lk(mu_);
  return count_;
}

void BlockCipher::ctr_run(const CtrContext& ctx, ByteView in,
                          std::span<uint8_t> out, bool encrypting) const {
  if (in.size() != out.size()) fail(DW_ERR_SIZE_MISMATCH, "ctr buffer sizes");
  if (encrypting && audit_) audit_->record(ctx);
  // epoch(64) || index(32) || intra-block counter(32), big-endian so the
  // cipher's increment only ever touches the intra-block field.
  uint8_t iv[kIvBytes];
  for (int i = 0; i < 8; ++i) iv[i] = uint8_t(ctx.epoch >> (8 * (7 - i)));
  for (int i = 0; i < 4; ++i) iv[8 + i] = uint8_t(ctx.index >> (8 * (3 - i)));
  std::memset(iv + 12, 0, 4);

  auto c = make_ctx();
  if (EVP_EncryptInit_ex(c.get(), EVP_aes_256_ctr(), nullptr,
                         key_.bytes.data(), iv) != 1)
    fail(DW_ERR_INTERNAL, "EVP ctr init failed");
  int outl = 0;
  if (EVP_EncryptUpdate(c.get(), out.data(), &outl, in.data(),
                        int(in.size())) != 1 ||
      outl != int(in.size()))
    fail(DW_ERR_INTERNAL, "EVP ctr update failed");
}

void BlockCipher::ctr_encrypt(const CtrContext& ctx, ByteView in,
                              std::span<uint8_t> out) const {
  ctr_run(ctx, in, out, true);
}

void BlockCipher::ctr_decrypt(const CtrContext& ctx, ByteView in,
                              std::span<uint8_t> out) const {
  ctr_run(ctx, in, out, false);
}

Bytes BlockCipher::ctr_encrypt(const CtrContext& ctx, ByteView in) const {
  Bytes out(in.size());
  ctr_encrypt(ctx, in, out);
  return out;
}

Bytes BlockCipher::ctr_decrypt(const CtrContext& ctx, ByteView in) const {
  Bytes out(in.size());
  ctr_decrypt(ctx, in, out);
  return out;
}

Bytes BlockCipher::iv_encrypt(ByteView plaintext) const {
  Bytes out(iv_blob_size(plaintext.size()));
  random_bytes(std::span<uint8_t>(out.data(), kIvBytes));

  auto c = make_ctx();
  if (EVP_EncryptInit_ex(c.get(), EVP_aes_256_cbc(), nullptr,
                         key_.bytes.data(), out.data()) != 1)
    fail(DW_ERR_INTERNAL, "EVP cbc init failed");
  int n1 = 0, n2 = 0;
  if (EVP_EncryptUpdate(c.get(), out.data() + kIvBytes, &n1, plaintext.data(),
                        int(plaintext.size())) != 1)
    fail(DW_ERR_INTERNAL, "EVP cbc update failed");
  if (EVP_EncryptFinal_ex(c.get(), out.data() + kIvBytes + n1, &n2) != 1)
    fail(DW_ERR_INTERNAL, "EVP cbc final failed");
  if (kIvBytes + size_t(n1) + size_t(n2) != out.size())
    fail(DW_ERR_INTERNAL, "EVP cbc length mismatch");
  return out;
}

Bytes BlockCipher::iv_decrypt(ByteView blob) const {
  if (blob.size() < kIvBytes + 16 || (blob.size() - kIvBytes) % 16 != 0)
    fail(DW_ERR_MALFORMED, "iv blob has impossible length");
  auto c = make_ctx();
  if (EVP_DecryptInit_ex(c.get(), EVP_aes_256_cbc(), nullptr,
                         key_.bytes.data(), blob.data()) != 1)
    fail(DW_ERR_INTERNAL, "EVP cbc init failed");
  Bytes out(blob.size() - kIvBytes);
  int n1 = 0, n2 = 0;
  if (EVP_DecryptUpdate(c.get(), out.data(), &n1, blob.data() + kIvBytes,
                        int(blob.size() - kIvBytes)) != 1)
    fail(DW_ERR_MALFORMED, "cbc decrypt failed");
  if (EVP_DecryptFinal_ex(c.get(), out.data() + n1, &n2) != 1)
    fail(DW_ERR_MALFORMED, "malformed padding");
  out.resize(size_t(n1) + size_t(n2));
  return out;
}

}  // namespace detworam
