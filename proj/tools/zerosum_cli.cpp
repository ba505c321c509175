#include <cstdio>
int main() { std::puts("usage: zerosum <command>"); return 3; }
