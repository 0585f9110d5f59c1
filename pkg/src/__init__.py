# dyncoh
