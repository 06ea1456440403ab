// Copyright 2026 The credstack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "credstack/pem.hpp"

#include <openssl/asn1.h>
#include <openssl/bio.h>
#include <openssl/bn.h>
#include <openssl/err.h>
#include <openssl/pem.h>
#include <openssl/x509.h>

#include <ctime>
#include <memory>

#include "credstack/error.hpp"

namespace credstack {
namespace {

struct BioFree {
  void operator()(BIO* bio) const { BIO_free(bio); }
};
struct X509Free {
  void operator()(X509* cert) const { X509_free(cert); }
};
struct OpensslFree {
  void operator()(void* p) const { OPENSSL_free(p); }
};

std::string name_to_string(const X509_NAME* name) {
  std::unique_ptr<BIO, BioFree> bio(BIO_new(BIO_s_mem()));
  X509_NAME_print_ex(bio.get(), name, 0, XN_FLAG_RFC2253);
  char* data = nullptr;
  const long len = BIO_get_mem_data(bio.get(), &data);
  return std::string(data, static_cast<std::size_t>(len));
}

std::int64_t asn1_time_to_epoch(const ASN1_TIME* time) {
  std::tm tm{};
  if (ASN1_TIME_to_tm(time, &tm) != 1) {
    throw MalformedPem("certificate has an unreadable validity time");
  }
  return static_cast<std::int64_t>(timegm(&tm));
}

CertificateInfo summarize_certificate(const unsigned char* der, long len) {
  const unsigned char* p = der;
  std::unique_ptr<X509, X509Free> cert(d2i_X509(nullptr, &p, len));
  if (!cert) throw MalformedPem("CERTIFICATE block is not a valid X.509 DER");

  CertificateInfo info;
  info.subject = name_to_string(X509_get_subject_name(cert.get()));
  info.issuer = name_to_string(X509_get_issuer_name(cert.get()));
  if (BIGNUM* serial =
          ASN1_INTEGER_to_BN(X509_get0_serialNumber(cert.get()), nullptr)) {
    std::unique_ptr<char, OpensslFree> hex(BN_bn2hex(serial));
    info.serial_hex = hex ? hex.get() : "";
    BN_free(serial);
  }
  info.not_before = asn1_time_to_epoch(X509_get0_notBefore(cert.get()));
  info.not_after = asn1_time_to_epoch(X509_get0_notAfter(cert.get()));
  return info;
}

}  // namespace

const CertificateInfo* PemBundle::leaf_certificate() const {
  for (const auto& block : blocks) {
    if (block.certificate) return &*block.certificate;
  }
  return nullptr;
}

bool has_pem_armor(std::string_view text) {
  return text.find("-----BEGIN ") != std::string_view::npos;
}

PemBundle decode_pem_bundle(std::string_view text) {
  if (!has_pem_armor(text)) throw MalformedPem("no PEM armor found");

  std::unique_ptr<BIO, BioFree> bio(
      BIO_new_mem_buf(text.data(), static_cast<int>(text.size())));
  PemBundle bundle;
  ERR_clear_error();
  for (;;) {
    char* name = nullptr;
    char* header = nullptr;
    unsigned char* data = nullptr;
    long len = 0;
    if (PEM_read_bio(bio.get(), &name, &header, &data, &len) != 1) {
      const unsigned long err = ERR_peek_last_error();
      ERR_clear_error();
      if (!bundle.blocks.empty() && ERR_GET_LIB(err) == ERR_LIB_PEM &&
          ERR_GET_REASON(err) == PEM_R_NO_START_LINE) {
        break;
      }
      throw MalformedPem("damaged PEM block");
    }
    std::unique_ptr<char, OpensslFree> name_guard(name);
    std::unique_ptr<char, OpensslFree> header_guard(header);
    std::unique_ptr<unsigned char, OpensslFree> data_guard(data);

    PemBlock block;
    block.label = name;
    block.der_size = static_cast<std::size_t>(len);
    if (block.label == "CERTIFICATE" || block.label == "X509 CERTIFICATE") {
      block.certificate = summarize_certificate(data, len);
    }
    bundle.blocks.push_back(std::move(block));
  }
  return bundle;
}

}  // namespace credstack
