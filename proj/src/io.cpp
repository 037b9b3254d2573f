// placeholder - implementation follows
