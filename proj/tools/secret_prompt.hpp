#pragma once

#include <termios.h>
#include <unistd.h>

#include <iostream>
#include <string>

namespace mikfs::tools {

// Reads one line from stdin, without echo when stdin is a terminal.
inline std::string read_secret(const std::string& prompt)
{
    const bool tty = ::isatty(STDIN_FILENO) != 0;
    termios saved{};
    if (tty) {
        std::cerr << prompt << std::flush;
        ::tcgetattr(STDIN_FILENO, &saved);
        termios quiet = saved;
        quiet.c_lflag &= ~static_cast<tcflag_t>(ECHO);
        ::tcsetattr(STDIN_FILENO, TCSANOW, &quiet);
    }
    std::string line;
    std::getline(std::cin, line);
    if (tty) {
        ::tcsetattr(STDIN_FILENO, TCSANOW, &saved);
        std::cerr << '\n';
    }
    return line;
}

}  // namespace mikfs::tools
