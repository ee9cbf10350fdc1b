// Stable per-class colors: hash the class id so colors survive reloads
// and retrains without any stored mapping.

export function classColor(classId: string): string {
  let hash = 2166136261;
  for (let i = 0; i < classId.length; i++) {
    hash ^= classId.charCodeAt(i);
    hash = Math.imul(hash, 16777619);
  }
  const hue = ((hash >>> 0) % 360 + 360) % 360;
  const lightness = 38 + ((hash >>> 9) % 18);
  return `hsl(${hue}, 65%, ${lightness}%)`;
}
