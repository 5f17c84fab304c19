#pragma once

// Live HTTP(S) transport for fetch_daily_history(). Requires cpp-httplib and
// OpenSSL; the core library does not include this header.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <string>

#include "error.hpp"
#include "ingest.hpp"

namespace wavescope {

class HttplibTransport : public HttpTransport {
public:
    explicit HttplibTransport(int timeout_seconds = 30) : timeout_(timeout_seconds) {}

    HttpResponse get(const HttpRequest& request) override
    {
        const auto scheme_end = request.url.find("://");
        if (scheme_end == std::string::npos)
            throw TransportError("malformed URL '" + request.url + "'");
        const auto path_begin = request.url.find('/', scheme_end + 3);
        const std::string origin = request.url.substr(0, path_begin);
        const std::string path = path_begin == std::string::npos ? "/" : request.url.substr(path_begin);

        httplib::Client client(origin);
        client.set_connection_timeout(timeout_);
        client.set_read_timeout(timeout_);
        client.set_follow_location(true);
        httplib::Params params(request.query.begin(), request.query.end());
        httplib::Headers headers(request.headers.begin(), request.headers.end());
        auto res = client.Get(path, params, headers);
        if (!res)
            throw TransportError("GET " + origin + path + " failed: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }

private:
    int timeout_;
};

} // namespace wavescope
