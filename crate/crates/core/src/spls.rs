// placeholder pending implementation
