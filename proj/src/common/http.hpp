#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lotwatch {

struct HttpResponse {
  // 0 when the request never produced a status line.
  int status = 0;
  std::string body;
  std::string transport_error;

  bool transport_ok() const { return status != 0; }
};

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/'
};

// Throws Error(config) on anything that is not http(s)://host[:port][/path].
ParsedUrl parse_url(std::string_view url);

using HeaderList = std::vector<std::pair<std::string, std::string>>;

// Blocking POST. Transport failures are reported in the response, not thrown.
HttpResponse http_post(const std::string& url, const std::string& body,
                       const std::string& content_type, const HeaderList& headers,
                       double timeout_s);

HttpResponse http_get(const std::string& url, const HeaderList& headers, double timeout_s);

std::string base64_encode(std::string_view bytes);
// Throws Error(decode) on malformed input.
std::string base64_decode(std::string_view text);

std::string sha256_hex(std::string_view bytes);

}  // namespace lotwatch
