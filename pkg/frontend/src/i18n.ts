/** Chrome labels in four locales. USSD screen text never goes through
 * this table: the handset renders whatever the server sent, untranslated. */

const EN = {
  app_title: "e-Government services demo",
  portal_heading: "Service portal",
  handset_heading: "Virtual handset",
  chaos_heading: "Network conditions",
  language_label: "Language",
  service_label: "Service",
  service_passport: "Passport application",
  service_business: "Business registration",
  service_taxes: "Tax filing",
  msisdn_label: "Phone number",
  email_label: "Email",
  password_label: "Password",
  otp_label: "One-time code (optional)",
  login_mma: "Log in with mobile money PIN",
  login_sso: "Log in with password",
  status_idle: "Not signed in",
  status_pushing: "Contacting the operator...",
  status_waiting: "Approve the request on your handset",
  status_authenticated: "Authenticated",
  status_granted: "Service opened",
  status_denied: "Request denied",
  status_locked: "PIN locked after repeated failures",
  status_expired: "Request timed out",
  status_network: "Network dropped, request failed",
  status_rate_limited: "Too many attempts, wait a minute",
  status_bad_credentials: "Wrong email or password",
  retry: "Try again",
  open_service: "Open service",
  keypad_send: "Send",
  keypad_clear: "Clear",
  handset_idle: "No prompt. Waiting for a push...",
  handset_closed: "Session closed",
  net_label: "Internet",
  gsm_label: "Signaling",
  swap_button: "Simulate SIM swap",
  swap_done: "SIM swapped: bound tokens are now invalid",
  debug_heading: "Session details",
  debug_state: "Server state",
  debug_sub: "Subject",
  debug_exp: "Token expires",
  debug_no_token: "No token held",
};

export type MsgKey = keyof typeof EN;
export type LocaleCode = "en" | "sw" | "rw" | "fr";

const SW: Record<MsgKey, string> = {
  app_title: "Onyesho la huduma za serikali mtandaoni",
  portal_heading: "Tovuti ya huduma",
  handset_heading: "Simu ya mkononi",
  chaos_heading: "Hali ya mtandao",
  language_label: "Lugha",
  service_label: "Huduma",
  service_passport: "Maombi ya pasipoti",
  service_business: "Usajili wa biashara",
  service_taxes: "Kulipa kodi",
  msisdn_label: "Namba ya simu",
  email_label: "Barua pepe",
  password_label: "Nenosiri",
  otp_label: "Nambari ya mara moja (hiari)",
  login_mma: "Ingia kwa PIN ya pesa za simu",
  login_sso: "Ingia kwa nenosiri",
  status_idle: "Hujaingia",
  status_pushing: "Inawasiliana na mtandao...",
  status_waiting: "Thibitisha ombi kwenye simu yako",
  status_authenticated: "Umethibitishwa",
  status_granted: "Huduma imefunguliwa",
  status_denied: "Ombi limekataliwa",
  status_locked: "PIN imefungwa baada ya makosa mengi",
  status_expired: "Muda wa ombi umekwisha",
  status_network: "Mtandao umekatika, ombi limeshindikana",
  status_rate_limited: "Majaribio mengi mno, subiri dakika",
  status_bad_credentials: "Barua pepe au nenosiri si sahihi",
  retry: "Jaribu tena",
  open_service: "Fungua huduma",
  keypad_send: "Tuma",
  keypad_clear: "Futa",
  handset_idle: "Hakuna ujumbe. Inasubiri...",
  handset_closed: "Kikao kimefungwa",
  net_label: "Intaneti",
  gsm_label: "Mawimbi",
  swap_button: "Iga ubadilishaji wa SIM",
  swap_done: "SIM imebadilishwa: tokeni zilizofungwa si halali tena",
  debug_heading: "Maelezo ya kikao",
  debug_state: "Hali ya seva",
  debug_sub: "Mtumiaji",
  debug_exp: "Tokeni inaisha",
  debug_no_token: "Hakuna tokeni",
};

const RW: Record<MsgKey, string> = {
  app_title: "Icyitegererezo cya serivisi za leta kuri murandasi",
  portal_heading: "Urubuga rwa serivisi",
  handset_heading: "Telefoni",
  chaos_heading: "Imiterere y'umuyoboro",
  language_label: "Ururimi",
  service_label: "Serivisi",
  service_passport: "Gusaba pasiporo",
  service_business: "Kwandikisha ubucuruzi",
  service_taxes: "Kwishyura imisoro",
  msisdn_label: "Nimero ya telefoni",
  email_label: "Imeyili",
  password_label: "Ijambobanga",
  otp_label: "Umubare wo mu kanya (si itegeko)",
  login_mma: "Injira ukoresheje PIN ya mobile money",
  login_sso: "Injira ukoresheje ijambobanga",
  status_idle: "Ntabwo winjiye",
  status_pushing: "Turi kuvugana n'umuyoboro...",
  status_waiting: "Emeza gusaba kuri telefoni yawe",
  status_authenticated: "Wemejwe",
  status_granted: "Serivisi yafunguwe",
  status_denied: "Gusaba byanze",
  status_locked: "PIN yafunzwe nyuma yo kwibeshya kenshi",
  status_expired: "Igihe cyo gusaba cyarenze",
  status_network: "Umuyoboro wacitse, gusaba byanze",
  status_rate_limited: "Wagerageje kenshi cyane, tegereza umunota",
  status_bad_credentials: "Imeyili cyangwa ijambobanga sibyo",
  retry: "Ongera ugerageze",
  open_service: "Fungura serivisi",
  keypad_send: "Ohereza",
  keypad_clear: "Siba",
  handset_idle: "Nta butumwa. Turindiriye...",
  handset_closed: "Umukoro warangiye",
  net_label: "Interineti",
  gsm_label: "Ikimenyetso",
  swap_button: "Igana guhindura SIM",
  swap_done: "SIM yahinduwe: tokeni zifatanye nayo ntizikora",
  debug_heading: "Ibisobanuro by'umukoro",
  debug_state: "Imiterere kuri seriveri",
  debug_sub: "Ukoresha",
  debug_exp: "Tokeni izarangira",
  debug_no_token: "Nta tokeni ihari",
};

const FR: Record<MsgKey, string> = {
  app_title: "Démonstration des services publics en ligne",
  portal_heading: "Portail des services",
  handset_heading: "Téléphone virtuel",
  chaos_heading: "Conditions réseau",
  language_label: "Langue",
  service_label: "Service",
  service_passport: "Demande de passeport",
  service_business: "Immatriculation d'entreprise",
  service_taxes: "Déclaration d'impôts",
  msisdn_label: "Numéro de téléphone",
  email_label: "Adresse e-mail",
  password_label: "Mot de passe",
  otp_label: "Code à usage unique (facultatif)",
  login_mma: "Connexion par PIN mobile money",
  login_sso: "Connexion par mot de passe",
  status_idle: "Non connecté",
  status_pushing: "Contact de l'opérateur...",
  status_waiting: "Confirmez la demande sur votre téléphone",
  status_authenticated: "Authentifié",
  status_granted: "Service ouvert",
  status_denied: "Demande refusée",
  status_locked: "PIN verrouillé après échecs répétés",
  status_expired: "Demande expirée",
  status_network: "Réseau coupé, échec de la demande",
  status_rate_limited: "Trop de tentatives, patientez une minute",
  status_bad_credentials: "E-mail ou mot de passe incorrect",
  retry: "Réessayer",
  open_service: "Ouvrir le service",
  keypad_send: "Envoyer",
  keypad_clear: "Effacer",
  handset_idle: "Aucune invite. En attente...",
  handset_closed: "Session terminée",
  net_label: "Internet",
  gsm_label: "Signalisation",
  swap_button: "Simuler un échange de SIM",
  swap_done: "SIM échangée : les jetons liés sont invalides",
  debug_heading: "Détails de la session",
  debug_state: "État serveur",
  debug_sub: "Sujet",
  debug_exp: "Expiration du jeton",
  debug_no_token: "Aucun jeton détenu",
};

export const STRINGS: Record<LocaleCode, Record<MsgKey, string>> = {
  en: EN, sw: SW, rw: RW, fr: FR,
};

export const LOCALES: LocaleCode[] = ["en", "sw", "rw", "fr"];

let active: LocaleCode = "en";

export function setLocale(code: LocaleCode): void {
  active = code;
}

export function getLocale(): LocaleCode {
  return active;
}

export function t(key: MsgKey): string {
  return STRINGS[active][key] ?? EN[key];
}
