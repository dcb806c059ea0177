// Build-time configuration. Point API_BASE at the review service before
// running `npm run build`; the empty string means same-origin.
export const API_BASE: string = "";
