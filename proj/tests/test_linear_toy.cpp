#include <gtest/gtest.h>

#include "hjfd/hjfd.hpp"
