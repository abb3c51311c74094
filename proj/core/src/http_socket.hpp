#pragma once

#include <httplib.h>

namespace ghs::detail {

// httplib's default sets SO_REUSEPORT, which lets a second listener share a
// port that is already taken.
inline void exclusive_listen(httplib::Server& server) {
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
}

}  // namespace ghs::detail
