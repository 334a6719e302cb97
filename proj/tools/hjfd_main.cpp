#include <cstdio>

#include "hjfd/hjfd.hpp"

int main() {
    std::puts("hjfd cli placeholder");
    return 0;
}
