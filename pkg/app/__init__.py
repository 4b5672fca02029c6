# qtel
